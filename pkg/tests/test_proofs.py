import pytest
from hypothesis import given, settings, strategies as st

from sosforge.proofs import (AMBIGUOUS, FALSE, TRUE, IncompleteTSS, ground_universe, generate_lts,
                             is_complete, well_founded_model, ws_oracle)
from sosforge.syntax import emit_term, parse_tss, term_for
from sosforge.terms import Signature, const
from sosforge.tss import TAU, TSS, Rule, neg, pos


def names(u):
    return sorted(emit_term(t) for t in u)


def test_universe_depth_zero(seq):
    u = ground_universe(seq, [term_for(seq, "p")], 0)
    assert names(u) == ["p"] and not u.truncated


def test_universe_sequencing(seq):
    u = ground_universe(seq, [term_for(seq, "p;r")], 2)
    assert names(u) == ["0", "p", "p ; r", "r"] and not u.truncated
    assert ground_universe(seq, [term_for(seq, "p;r")], 0).truncated


def test_universe_rejects_open_seed(seq):
    with pytest.raises(ValueError):
        ground_universe(seq, [term_for(seq, "x;r")], 1)


def test_priority_blocking(prio):
    u = ground_universe(prio, [term_for(prio, "Theta(s)")])
    m = well_founded_model(prio, u)
    ts, z = term_for(prio, "Theta(s)"), term_for(prio, "Theta(0)")
    assert m.positive(ts, "a", z) == FALSE
    assert m.negative(ts, "a") == TRUE
    assert m.positive(ts, "b", z) == TRUE
    assert is_complete(prio, u) == (True, [])


def test_selfrefuting(corpus):
    P = corpus("selfrefuting.tss")
    u = ground_universe(P, [const("c")])
    m = well_founded_model(P, u)
    assert m.positive(const("c"), "a", const("c1")) == AMBIGUOUS
    ok, amb = is_complete(P, u)
    assert not ok and any(str(l) == "c -a-> c1" for l in amb)
    with pytest.raises(IncompleteTSS):
        generate_lts(P, [const("c")])


def test_premise_free_complete():
    P = parse_tss("actions a\nsig c/0\nsig d/0\n|- c -a-> d\n")
    assert is_complete(P, [const("c"), const("d")])[0]


def test_sequencing_lts(seq):
    pr, qr, r, z, p = (term_for(seq, s) for s in ("p;r", "q;r", "r", "0", "p"))
    l = generate_lts(seq, [pr, qr])
    out = lambda t: {(a, l.terms[u]) for a, u in l.succ[l.state(t)]}
    assert out(pr) == {(TAU, pr)}
    assert out(qr) == {("a", z)}


def test_edgeless_lts():
    P = parse_tss("actions a\nsig c/0\n")
    l = generate_lts(P, [const("c")], 0)
    assert l.n == 1 and l.transitions == ()


def test_ccs_least_model(corpus):
    P = corpus("ccs.tss")
    t = term_for(P, "pa(0) || pt(pb(0))")
    l = generate_lts(P, [t])
    # two interleavings of a and tau, then b: 3 * 2 reachable states on top of 0-parts
    labels = sorted({a for _, a, _ in l.transitions})
    assert labels == ["a", "b", TAU]
    assert len([1 for s, _, _ in l.transitions if s == l.state(t)]) == 2


def test_proof_tree_replays(seq):
    qr = term_for(seq, "q;r")
    u = ground_universe(seq, [qr])
    m = well_founded_model(seq, u)
    tree = m.proof(qr, "a", term_for(seq, "0"))
    assert tree.rule.name == "seq2_a"
    hyps = [c.literal for c in tree.children if c.hypothesis]
    assert {str(h) for h in hyps} == {"q -a-/>", "q -tau-/>"}
    assert all(m.value(h) == TRUE for h in hyps)
    with pytest.raises(ValueError):
        m.proof(qr, TAU, qr)


@pytest.mark.parametrize("name,seeds", [
    ("sequencing.tss", ["p;r", "q;r"]),
    ("priority.tss", ["Theta(s)", "Theta(p)"]),
    ("negpatience.tss", ["f(p, q)"]),
    ("selfrefuting.tss", ["c"]),
])
def test_agrees_with_definition(corpus, name, seeds):
    P = corpus(name)
    u = ground_universe(P, [term_for(P, s) for s in seeds])
    m = well_founded_model(P, u)
    pos_set, neg_set = ws_oracle(P, u)
    assert set(m.true_transitions()) == pos_set
    assert {(p, a) for p in u for a in P.labels if m.negative(p, a) == TRUE} == neg_set


# --- random closed TSSs over constants ---------------------------------------------

CONSTS = [const("c%d" % i) for i in range(4)]
LABELS = ["a", TAU]

lits = st.one_of(
    st.builds(pos, st.sampled_from(CONSTS), st.sampled_from(LABELS), st.sampled_from(CONSTS)),
    st.builds(neg, st.sampled_from(CONSTS), st.sampled_from(LABELS)))
rules = st.builds(lambda hs, c: Rule.make(hs, c), st.lists(lits, max_size=2),
                  st.builds(pos, st.sampled_from(CONSTS), st.sampled_from(LABELS), st.sampled_from(CONSTS)))


def closed_tss(rs):
    return TSS(Signature({c.symbol: 0 for c in CONSTS}), ["a"], rs)


@settings(max_examples=150, deadline=None)
@given(st.lists(rules, max_size=6))
def test_random_model_consistent_and_matches_definition(rs):
    P = closed_tss(rs)
    m = well_founded_model(P, CONSTS)
    for p in CONSTS:
        for a in LABELS:
            if m.negative(p, a) == TRUE:
                assert not m.successors(p, a)
    pos_set, neg_set = ws_oracle(P, CONSTS)
    assert set(m.true_transitions()) <= pos_set
    if is_complete(P, CONSTS)[0]:
        assert set(m.true_transitions()) == pos_set
        assert {(p, a) for p in CONSTS for a in LABELS if m.negative(p, a) == TRUE} == neg_set


@settings(max_examples=100, deadline=None)
@given(st.lists(st.builds(lambda hs, c: Rule.make([h for h in hs if h.positive], c),
                          st.lists(lits, max_size=2), rules.map(lambda r: r.conclusion)), max_size=6))
def test_negation_free_is_least_fixpoint(rs):
    P = closed_tss(rs)
    m = well_founded_model(P, CONSTS)
    facts = set()
    while True:
        new = {(r.source, r.label, r.target) for r in rs
               if all((h.source, h.label, h.target) in facts for h in r.premises)}
        if new <= facts:
            break
        facts |= new
    assert set(m.true_transitions()) == facts
    assert is_complete(P, CONSTS)[0]
