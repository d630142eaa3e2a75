import pytest
from hypothesis import given, settings, strategies as st

from sosforge.decompose import (Decomposer, DecompositionError, Mapping, battery, battery_terms,
                                closed_instances, decompose, verify_class_preservation,
                                verify_decomposition_theorem, weakest)
from sosforge.formula import Conj, DeltaMod, Diam, EpsDiam, Neg, TOP
from sosforge.modal import STABLE, class_membership, normalize, satisfies
from sosforge.proofs import generate_lts
from sosforge.syntax import term_for
from sosforge.terms import Var, apply, variables
from sosforge.tss import TAU

A = Diam("a", TOP)


def as_sets(maps):
    return {frozenset((x, str(normalize(f))) for x, f in m.items) for m in maps}


def test_variable_term(seq):
    (m,) = decompose(seq, Var("x"), A)
    assert m.as_dict() == {"x": A}


def test_sequencing_two_mappings(seq):
    got = decompose(seq, term_for(seq, "x;y"), A)
    want = [Mapping.of({"x": A}),
            Mapping.of({"x": Conj((Neg(A), Neg(Diam(TAU, TOP)))), "y": A})]
    assert as_sets(got) == as_sets(want)


def test_priority_stability_clause(prio):
    phi = EpsDiam(Conj((STABLE, A)))
    maps = decompose(prio, term_for(prio, "Theta(x)"), phi, gamma={("Theta", 1)})
    assert maps
    for m in maps:
        assert class_membership(m.get("x"), "Obs")


def test_top_decomposes_to_top(seq):
    assert decompose(seq, term_for(seq, "x;y"), TOP) == [Mapping()]
    assert verify_class_preservation(seq, {(";", 1), (";", 2)}, {(";", 1)},
                                     term_for(seq, "x;y"), TOP)["ok"]


def test_delta_rejected(seq):
    with pytest.raises(DecompositionError):
        decompose(seq, term_for(seq, "x;y"), DeltaMod(TOP))


def test_negation_cap(seq):
    with pytest.raises(DecompositionError):
        decompose(seq, term_for(seq, "x;y"), Neg(A), cap=1)


def test_theorem_sequencing(seq):
    U = [term_for(seq, s) for s in ("p", "q", "r", "0")]
    rep = verify_decomposition_theorem(seq, term_for(seq, "x;y"), A, U)
    assert rep["ok"] and rep["substitutions"] == 16


def test_theorem_priority(prio):
    U = [term_for(prio, s) for s in ("p", "q", "s")]
    phi = EpsDiam(Conj((TOP, A)))
    rep = verify_decomposition_theorem(prio, term_for(prio, "Theta(x)"), phi, U,
                                       Decomposer(prio, {("Theta", 1)}))
    assert rep["ok"] and rep["substitutions"] == 3


def test_closed_term(seq):
    t = term_for(seq, "p;r")
    for phi in battery():
        rep = verify_decomposition_theorem(seq, t, phi, [term_for(seq, "0")])
        assert rep["ok"] and rep["substitutions"] == 1
        assert rep["mappings"] in (0, 1)


def test_weakest_drops_stronger():
    m1 = Mapping.of({"x": A})
    m2 = Mapping.of({"x": Conj((A, STABLE))})
    m3 = Mapping.of({"y": A})
    assert weakest({m1, m2, m3}) == {m1, m3}


def test_battery_shape():
    phis = battery()
    assert len(phis) == 20 and len(set(phis)) == 20
    kinds = {type(f).__name__ for phi in phis for f in _walk(phi)}
    assert {"Conj", "Neg", "Diam", "EpsDiam", "TauHatDiam"} <= kinds


def _walk(phi):
    yield phi
    for k in getattr(phi, "parts", ()) + ((phi.body,) if hasattr(phi, "body") else ()):
        yield from _walk(k)


def test_battery_terms(seq):
    terms = [str(t) for t in battery_terms(seq)]
    assert terms[0] == "x1"
    assert "(x1 ; x1)" in terms and "(x1 ; x2)" in terms
    assert "((x1 ; x2) ; x3)" in terms and "(x1 ; (x1 ; x1))" in terms


# --- properties -------------------------------------------------------------------

U_SEQ = ["p", "q", "r", "0"]


@pytest.fixture(scope="module")
def seq_env(seq):
    U = [term_for(seq, s) for s in U_SEQ]
    terms = [term_for(seq, s) for s in ("x;y", "y;z", "x;x", "(x;y);x")]
    l = generate_lts(seq, U + closed_instances(terms, U))
    return seq, U, l, Decomposer(seq, {(";", 1)})


def _holds(l, maps, rho, vs):
    return any(all(satisfies(l, l.state(rho[x]), m.get(x)) for x in vs) for m in maps)


PHIS = [phi for phi in battery()]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PHIS), st.lists(st.sampled_from(U_SEQ), min_size=2, max_size=2))
def test_renaming_invariance(seq_env, phi, vals):
    seq, U, l, D = seq_env
    t1, t2 = term_for(seq, "x;y"), term_for(seq, "y;z")
    ren = {"x": "y", "y": "z"}
    got = {frozenset((ren[x], f) for x, f in m.items) for m in D.decompose(t1, phi)}
    assert got == {frozenset(m.items) for m in D.decompose(t2, phi)}


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PHIS))
def test_clause6_coherence(seq_env, phi):
    seq, U, l, D = seq_env
    image = []
    for m in D.decompose(term_for(seq, "x;y"), phi):
        image.append(Mapping.of({"x": Conj((m.get("x"), m.get("y")))}))
    image = [m for m in image if m is not None]
    direct = D.decompose(term_for(seq, "x;x"), phi)
    for u in U:
        rho = {"x": u}
        assert _holds(l, direct, rho, ["x"]) == _holds(l, image, rho, ["x"])


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PHIS), st.sampled_from(["x;y", "(x;y);x"]), st.data())
def test_soundness(seq_env, phi, text, data):
    seq, U, l, D = seq_env
    t = term_for(seq, text)
    vs = sorted(variables(t))
    rho = {x: data.draw(st.sampled_from(U)) for x in vs}
    if _holds(l, D.decompose(t, phi), rho, vs):
        assert satisfies(l, l.state(apply(rho, t)), phi)
