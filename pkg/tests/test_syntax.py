import glob
import os

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS
from sosforge.formula import Conj, DeltaMod, Diam, EpsDiam, Neg, TauHatDiam, TOP
from sosforge.lts import LTS
from sosforge.syntax import (SyntaxErr, emit_formula, emit_lts, emit_term, emit_tss, load,
                             parse_formula, parse_lts, parse_tss, term_for)
from sosforge.tss import TAU

CORPUS_FILES = sorted(glob.glob(os.path.join(CORPUS, "*")))


@pytest.mark.parametrize("path", CORPUS_FILES, ids=os.path.basename)
def test_corpus_parses(path):
    assert load(path) is not None


@pytest.mark.parametrize("path", [p for p in CORPUS_FILES if p.endswith(".tss")], ids=os.path.basename)
def test_tss_roundtrip(path):
    P = load(path)
    again = parse_tss(emit_tss(P))
    assert again == P
    assert emit_tss(again) == emit_tss(P)


def test_priority_expansion(prio):
    rules = [r for r in prio.rules if r.source.symbol == "Theta"]
    assert len(rules) == 3
    by_label = {r.label: r for r in rules}
    assert sorted(by_label) == ["a", "b", TAU]
    # only a has higher-priority actions
    assert {str(h) for h in by_label["a"].negatives()} == {"x -b-/>", "x -tau-/>"}
    assert by_label["b"].negatives() == [] and by_label[TAU].negatives() == []


def test_sequencing_expansion(seq):
    rules = [r for r in seq.rules if r.source.symbol == ";"]
    assert len(rules) == 4
    seq2 = [r for r in rules if r.negatives()]
    assert len(seq2) == 2
    for r in seq2:
        assert {str(h) for h in r.negatives()} == {"x -a-/>", "x -tau-/>"}


def test_axiom_has_no_premises():
    P = parse_tss("actions a\nsig c/0\nsig d/0\n|- c -a-> d\n")
    (r,) = P.rules
    assert r.premises == () and str(r) == " |- c -a-> d"


def test_order_is_closed():
    P = parse_tss("actions a, b, c\norder a < b, b < c\nsig f/1\n")
    assert ("a", "c") in P.order


@pytest.mark.parametrize("text,where", [
    ("actions a\nsig f/1\n|- f(x) -a->\n", 3),
    ("actions a\nsig f/1\n|- g(x) -a-> x\n", 3),
    ("actions a\nsig f/1\n|- f(x, x) -a-> x\n", 3),
    ("actions a\nsig f/1\n|- f(x) -b-> x\n", 3),
    ("actions a, b\norder a < b, b < a\n", 0),
    ("actions tau\n", 1),
])
def test_tss_errors(text, where):
    with pytest.raises(SyntaxErr) as e:
        parse_tss(text)
    if where:
        assert e.value.line == where


def test_term_syntax(seq):
    t = term_for(seq, "(p ; q) ; r")
    assert emit_term(t) == "(p ; q) ; r"
    assert term_for(seq, emit_term(t)) == t


def test_aut_deadlock():
    l = parse_lts("des (0, 0, 1)\n")
    assert l.n == 1 and l.transitions == ()


def test_aut_tau_loop():
    l = parse_lts('des (0, 1, 1)\n(0,"tau",0)\n')
    assert l.transitions == ((0, TAU, 0),)


def test_aut_roundtrip():
    text = 'des (0, 3, 3)\n(0,"a",1)\n(1,"tau",2)\n(2,"@Dtop",0)\n'
    l = parse_lts(text)
    assert emit_lts(l) == text
    assert parse_lts(emit_lts(l)) == l


@pytest.mark.parametrize("text", [
    "des (0, 1, 1)\n(0,\"a\",3)\n",
    "des 0 1 1\n",
    "des (0, 2, 2)\n(0,\"a\",1)\n",
    "(0,\"a\",1)\n",
])
def test_aut_errors(text):
    with pytest.raises(SyntaxErr):
        parse_lts(text)


def test_formula_tokens():
    assert parse_formula("T") == TOP
    assert parse_formula("<eps>/\\{~<tau>T, <a>T}") == EpsDiam(Conj((Neg(Diam(TAU, TOP)), Diam("a", TOP))))
    assert parse_formula("D <eps><a>T") == DeltaMod(EpsDiam(Diam("a", TOP)))
    assert parse_formula("<that>(~T)") == TauHatDiam(Neg(TOP))


def test_formula_error():
    with pytest.raises(SyntaxErr):
        parse_formula("<a>")
    with pytest.raises(SyntaxErr):
        parse_formula("T T")


def formulas():
    return st.recursive(
        st.just(TOP),
        lambda f: st.one_of(
            st.builds(Neg, f),
            st.builds(Diam, st.sampled_from(["a", "b", TAU, "@Dtop"]), f),
            st.builds(EpsDiam, f),
            st.builds(TauHatDiam, f),
            st.builds(DeltaMod, f),
            st.lists(f, max_size=3).map(lambda xs: Conj(tuple(xs)))),
        max_leaves=10)


@given(formulas())
def test_formula_roundtrip(phi):
    assert parse_formula(emit_formula(phi)) == phi


@given(st.integers(1, 5), st.lists(st.tuples(st.integers(0, 4), st.sampled_from(["a", "tau", "iota"]),
                                            st.integers(0, 4))))
def test_aut_roundtrip_random(n, trans):
    trans = [(s % n, a, t % n) for s, a, t in trans]
    l = LTS(n, trans)
    assert parse_lts(emit_lts(l)) == l
