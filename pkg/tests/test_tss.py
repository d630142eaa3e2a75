from hypothesis import given, strategies as st

from sosforge.syntax import parse_tss
from sosforge.terms import App, Var, app, var_occurrences
from sosforge.tss import (TAU, Rule, canonical, classify_rule, is_gamma_patient_rule,
                          is_gamma_patient_tss, is_patience_rule, liquid_occurrences, neg,
                          patience_rule, pos, universal)

x, y, z = Var("x"), Var("y"), Var("z")


def test_priority_rule_flags(prio):
    (r,) = [r for r in prio.rules if r.source.symbol == "Theta" and r.label == "a"]
    assert classify_rule(r) == {"standard", "ntytt", "ntyft", "nxytt", "decent", "lookahead-free"}


def test_lookahead_rule_flags(corpus):
    (r,) = [r for r in corpus("lookahead.tss").rules if r.name == "look"]
    flags = classify_rule(r)
    assert "decent" not in flags and "lookahead-free" not in flags


def test_axiom_flags():
    r = Rule.make([], pos(app("c"), "a", app("d")))
    assert classify_rule(r) == {"standard", "ntytt", "ntyft", "nxytt", "decent", "lookahead-free"}


def test_free_variable_not_decent():
    r = Rule.make([], pos(app("f", x), "a", y))
    assert "decent" not in classify_rule(r)
    assert "lookahead-free" in classify_rule(r)


def test_liquid_sequencing():
    lam = {(";", 1)}
    t = app(";", x, y)
    assert liquid_occurrences(lam, "x", t) == ([(1,)], [])
    assert liquid_occurrences(lam, "y", t) == ([], [(2,)])


def test_liquid_universal():
    t = app("f", app("g", x), x)
    liq, fro = liquid_occurrences({("f", 1), ("f", 2), ("g", 1)}, "x", t)
    assert len(liq) == 2 and not fro


def test_liquid_nested_frozen():
    t = app("f", app("g", x), x)
    liq, fro = liquid_occurrences({("f", 1), ("f", 2)}, "x", t)
    assert liq == [(2,)] and fro == [(1, 1)]
    liq, fro = liquid_occurrences({("f", 1)}, "x", t)
    assert liq == [] and sorted(fro) == [(1, 1), (2,)]


def test_bare_variable_is_liquid():
    assert liquid_occurrences(set(), "x", x) == ([()], [])


def test_patience_rules(seq, prio):
    gamma = {(";", 1)}
    (seq1,) = [r for r in seq.rules if r.name == "seq1_tau"]
    assert is_patience_rule(seq1, gamma)
    (prio_tau,) = [r for r in prio.rules if r.name == "prio_tau"]
    assert is_patience_rule(prio_tau, {("Theta", 1)})
    (prio_a,) = [r for r in prio.rules if r.name == "prio_a"]
    assert not is_patience_rule(prio_a, {("Theta", 1)})
    for r in seq.rules:
        if r.label != TAU:
            assert not is_patience_rule(r, universal(seq.signature))


def test_gamma_patient_tss(seq):
    assert is_gamma_patient_tss(seq, {(";", 1)}) == (True, [])
    ok, missing = is_gamma_patient_tss(seq, {(";", 1), (";", 2)})
    assert not ok and missing == [(";", 2)]
    assert is_gamma_patient_tss(seq, set()) == (True, [])


def test_gamma_patient_rule(seq):
    gamma = {("f", 1), ("g", 1)}
    r = Rule.make([pos(x, TAU, y)], pos(app("f", app("g", x), z), TAU, app("f", app("g", y), z)))
    assert is_gamma_patient_rule(r, gamma)
    assert not is_gamma_patient_rule(r, {("f", 1)})
    assert is_gamma_patient_rule(patience_rule("f", 2, 1), gamma)
    (seq2,) = [r for r in seq.rules if r.name == "seq2_tau"]
    assert not is_gamma_patient_rule(seq2, {(";", 1)})


def test_literal_denial():
    a = pos(x, "a", y)
    assert a.denies(neg(x, "a")) and not a.denies(neg(x, "b"))
    assert not neg(x, "a").positive


# --- properties -----------------------------------------------------------------

rules_text = st.sampled_from([
    "x -a-> y, y -b-> z |- f(x) -c-> z",
    "x -tau-> y |- g(x, w) -tau-> g(y, w)",
    "x -a-/>, w -b-> v |- g(x, w) -b-> g(x, v)",
    " |- f(x) -a-> u",
])


def _rule(text):
    P = parse_tss("actions a, b, c\nsig f/1\nsig g/2\n" + text + "\n")
    return P.rules[0]


@given(rules_text, st.permutations(["p1", "p2", "p3", "p4", "p5", "p6"]))
def test_classify_stable_under_renaming(text, names):
    r = _rule(text)
    ren = {v: Var(n) for v, n in zip(sorted(r.variables()), names)}
    assert classify_rule(r.subst(ren)) == classify_rule(r)
    assert canonical(r.subst(ren)) == canonical(r)


terms = st.recursive(st.sampled_from([x, y, app("c")]),
                     lambda k: st.one_of(st.builds(lambda u: App("g1", (u,)), k),
                                         st.builds(lambda u, v: App("f2", (u, v)), k, k)),
                     max_leaves=8)
preds = st.sets(st.sampled_from([("g1", 1), ("f2", 1), ("f2", 2)]))


@given(terms, preds)
def test_liquid_partition_covers(t, pred):
    for v in ("x", "y"):
        liq, fro = liquid_occurrences(pred, v, t)
        occ = [p for n, p in var_occurrences(t) if n == v]
        assert sorted(liq + fro) == sorted(occ)
        assert not set(liq) & set(fro)


@given(st.sampled_from([("f", 1, 1), ("f", 2, 2), ("g", 3, 2)]))
def test_patience_rule_is_patient(case):
    f, n, i = case
    r = patience_rule(f, n, i)
    assert is_patience_rule(r, {(f, i)})
    assert is_gamma_patient_rule(r, {(f, i)})
