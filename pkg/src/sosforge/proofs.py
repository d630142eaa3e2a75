"""Well-supported provability over a finite closed-term universe and LTS generation."""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .lts import LTS
from .syntax import emit_term
from .terms import Var, apply, is_closed, match, size, subterms, variables
from .tss import TSS, Literal, Rule

log = logging.getLogger(__name__)

TRUE, FALSE, AMBIGUOUS = "true", "false", "ambiguous"


class IncompleteTSS(Exception):
    def __init__(self, ambiguous):
        self.ambiguous = ambiguous
        shown = ", ".join(str(l) for l in ambiguous[:5])
        super().__init__("TSS is not complete over the universe; ambiguous: %s" % shown)


@dataclass
class Universe:
    terms: Tuple
    truncated: bool = False

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __contains__(self, t):
        return t in set(self.terms)


@dataclass
class ProofTree:
    literal: Literal
    children: List["ProofTree"] = field(default_factory=list)
    rule: Optional[Rule] = None
    hypothesis: bool = False

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class TruthAssignment:
    """Three-valued verdict on every closed literal with a source in the universe."""

    def __init__(self, universe, labels, true_atoms, possible_atoms, escapes, why=None):
        self.universe = tuple(universe)
        self.labels = tuple(labels)
        self._true = true_atoms
        self._possible = possible_atoms
        self.escapes = escapes
        self._why = why or {}

    def positive(self, p, label, q) -> str:
        if q in self._true.get((p, label), ()):
            return TRUE
        if q in self._possible.get((p, label), ()):
            return AMBIGUOUS
        return FALSE

    def negative(self, p, label) -> str:
        if self._true.get((p, label)):
            return FALSE
        if self._possible.get((p, label)):
            return AMBIGUOUS
        return TRUE

    def value(self, lit: Literal) -> str:
        if lit.positive:
            return self.positive(lit.source, lit.label, lit.target)
        return self.negative(lit.source, lit.label)

    def successors(self, p, label):
        return sorted(self._true.get((p, label), ()), key=_term_key)

    def true_transitions(self):
        for (p, a), qs in self._true.items():
            for q in qs:
                yield p, a, q

    def ambiguous(self) -> List[Literal]:
        out = []
        for p in self.universe:
            for a in self.labels:
                if self.negative(p, a) == AMBIGUOUS:
                    out.append(Literal(p, a, None))
                    for q in sorted(self._possible.get((p, a), set()) - self._true.get((p, a), set()),
                                    key=_term_key):
                        out.append(Literal(p, a, q))
        return out

    def proof(self, p, label, q) -> ProofTree:
        """Clause-1 proof tree for a true positive literal; negative premises become marked leaves."""
        lit = Literal(p, label, q)
        if self.positive(p, label, q) != TRUE:
            raise ValueError("%s is not true" % lit)
        rule, sigma = self._why[(p, label, q)]
        kids = []
        for h in rule.premises:
            g = h.subst(sigma)
            if g.positive:
                kids.append(self.proof(g.source, g.label, g.target))
            else:
                kids.append(ProofTree(g, hypothesis=True))
        return ProofTree(lit, kids, rule)


def _term_key(t):
    return (size(t), str(t))


# --- ground instances ------------------------------------------------------

class _Grounder:
    def __init__(self, P: TSS, universe):
        if not P.standard:
            raise ValueError("well-supported semantics needs a standard TSS")
        self.P = P
        self.universe = list(universe)
        self.uset = set(self.universe)
        self.by_head = defaultdict(list)
        for t in self.universe:
            self.by_head[t.symbol].append(t)
        self.escapes = set()

    def sources(self, r: Rule):
        s = r.source
        if isinstance(s, Var):
            for p in self.universe:
                yield p, {s.name: p}
            return
        for p in self.by_head.get(s.symbol, ()):
            sig = match(s, p)
            if sig is not None:
                yield p, sig

    def instances(self, r: Rule, atoms, neg_holds):
        pos = r.positives()
        negs = r.negatives()
        for p, sigma in self.sources(r):
            yield from self._solve(r, pos, negs, sigma, atoms, neg_holds)

    def _bind(self, names, sigma):
        names = sorted(names)
        for combo in itertools.product(self.universe, repeat=len(names)):
            s = dict(sigma)
            s.update(zip(names, combo))
            yield s

    def _solve(self, r, pos, negs, sigma, atoms, neg_holds):
        if pos:
            pick = None
            for k, h in enumerate(pos):
                if variables(h.source) <= sigma.keys():
                    pick = k
                    break
            if pick is None:
                unbound = variables(pos[0].source) - sigma.keys()
                for s in self._bind(unbound, sigma):
                    yield from self._solve(r, pos, negs, s, atoms, neg_holds)
                return
            h = pos[pick]
            lhs = apply(sigma, h.source)
            if lhs not in self.uset:
                self.escapes.add(("premise", str(lhs)))
                return
            rest = pos[:pick] + pos[pick + 1:]
            for q in list(atoms.get((lhs, h.label), ())):
                s2 = match(h.target, q, sigma)
                if s2 is not None:
                    yield from self._solve(r, rest, negs, s2, atoms, neg_holds)
            return
        unbound = set()
        for h in negs:
            unbound |= variables(h.source)
        if r.conclusion.positive:
            unbound |= variables(r.target)
        unbound -= sigma.keys()
        if unbound:
            for s in self._bind(unbound, sigma):
                yield from self._solve(r, pos, negs, s, atoms, neg_holds)
            return
        for h in negs:
            lhs = apply(sigma, h.source)
            if lhs not in self.uset:
                self.escapes.add(("premise", str(lhs)))
                return
            if not neg_holds(lhs, h.label):
                return
        yield sigma

    def derive(self, neg_holds, why=None):
        atoms: Dict[Tuple, set] = defaultdict(set)
        changed = True
        while changed:
            changed = False
            for r in self.P.rules:
                for sigma in list(self.instances(r, atoms, neg_holds)):
                    p = apply(sigma, r.source)
                    q = apply(sigma, r.target)
                    if q not in atoms[(p, r.label)]:
                        atoms[(p, r.label)].add(q)
                        changed = True
                        if why is not None:
                            why[(p, r.label, q)] = (r, sigma)
                        if q not in self.uset:
                            self.escapes.add(("target", str(q)))
        return {k: v for k, v in atoms.items() if v}


def _subterm_closure(terms):
    out = {}
    for t in terms:
        for u in subterms(t):
            out.setdefault(u, None)
    return out


def ground_universe(P: TSS, seeds: Sequence, depth: int = 16) -> Universe:
    """Seeds, their subterms, and every term reachable within depth over-approximated steps."""
    for t in seeds:
        if not is_closed(t):
            raise ValueError("seed %s is not closed" % t)
        P.signature.check(t)
    found = _subterm_closure(seeds)
    truncated = False
    for rnd in range(depth + 1):
        g = _Grounder(P, found)
        atoms = g.derive(lambda p, a: True)
        new = set()
        for qs in atoms.values():
            for q in qs:
                new.update(subterms(q))
        new -= found.keys()
        if not new:
            break
        if rnd == depth:
            truncated = True
            break
        for t in sorted(new, key=_term_key):
            found.setdefault(t, None)
    seeds_first = list(dict.fromkeys(seeds))
    rest = sorted((t for t in found if t not in set(seeds_first)), key=_term_key)
    return Universe(tuple(seeds_first + rest), truncated)


def well_founded_model(P: TSS, universe) -> TruthAssignment:
    """Alternating fixpoint: under- and over-approximations of the provable transitions."""
    terms = list(universe)
    g = _Grounder(P, terms)
    true_atoms: Dict = {}
    rounds = 0
    while True:
        rounds += 1
        possible = g.derive(lambda p, a: not true_atoms.get((p, a)))
        why = {}
        nxt = g.derive(lambda p, a: not possible.get((p, a)), why)
        if nxt == true_atoms:
            break
        true_atoms = nxt
    log.debug("well-founded model after %d rounds", rounds)
    return TruthAssignment(terms, P.labels, true_atoms, possible, frozenset(g.escapes), why)


def is_complete(P: TSS, universe):
    model = well_founded_model(P, universe)
    amb = model.ambiguous()
    return not amb, amb


class TermLTS(LTS):
    """An LTS whose states are closed terms."""

    def __init__(self, terms, transitions, truncated=False, escapes=frozenset()):
        self.terms = list(terms)
        self._index = {t: i for i, t in enumerate(self.terms)}
        super().__init__(len(self.terms), transitions, [emit_term(t) for t in self.terms], 0)
        self.truncated = truncated
        self.escapes = escapes

    def state(self, t) -> int:
        return self._index[t]

    def __contains__(self, t):
        return t in self._index


def generate_lts(P: TSS, seeds: Sequence, depth: int = 16) -> TermLTS:
    u = ground_universe(P, seeds, depth)
    model = well_founded_model(P, u)
    amb = model.ambiguous()
    if amb:
        raise IncompleteTSS(amb)
    return lts_of_model(model, u.truncated)


def lts_of_model(model: TruthAssignment, truncated=False) -> TermLTS:
    index = {t: i for i, t in enumerate(model.universe)}
    trans = []
    escapes = set(model.escapes)
    for p, a, q in model.true_transitions():
        if q in index:
            trans.append((index[p], a, index[q]))
        else:
            escapes.add(("target", str(q)))
    return TermLTS(model.universe, trans, truncated, frozenset(escapes))


# --- direct check of the proof-theoretic definition ------------------------

def ws_oracle(P: TSS, universe, max_literals: int = 30):
    """Well-supported provable literals computed from the definition itself.

    Returns (positive atoms, negative (source, label) pairs). Only for tiny universes.
    """
    terms = list(universe)
    labels = P.labels
    if len(terms) * len(labels) > max_literals:
        raise ValueError("universe too large for the direct check")
    uset = set(terms)
    instances = []
    for r in P.rules:
        vs = sorted(r.variables())
        for combo in itertools.product(terms, repeat=len(vs)):
            s = dict(zip(vs, combo))
            c = r.conclusion.subst(s)
            if c.source not in uset:
                continue
            prem = [h.subst(s) for h in r.premises]
            if any(h.source not in uset for h in prem):
                continue
            ps = [(h.source, h.label, h.target) for h in prem if h.positive]
            ns = frozenset((h.source, h.label) for h in prem if not h.positive)
            instances.append(((c.source, c.label, c.target), ps, ns))
    # Minimal sets N of negative hypotheses with N/atom irredundantly provable.
    sup = defaultdict(set)
    changed = True
    while changed:
        changed = False
        for head, ps, ns in instances:
            choices = [sup[a] for a in ps]
            if any(not c for c in choices):
                continue
            for pick in itertools.product(*choices):
                n = frozenset(ns.union(*pick)) if pick else ns
                if any(m <= n for m in sup[head]):
                    continue
                sup[head] = {m for m in sup[head] if not n <= m} | {n}
                changed = True
    pos_set, neg_set = set(), set()
    changed = True
    while changed:
        changed = False
        for head, ps, ns in instances:
            if head not in pos_set and all(a in pos_set for a in ps) and ns <= neg_set:
                pos_set.add(head)
                changed = True
        enabled = {(a[0], a[1]) for a in pos_set}
        for p in terms:
            for lab in labels:
                if (p, lab) in neg_set:
                    continue
                supports = [n for (s, l, q), ns in sup.items() if s == p and l == lab for n in ns]
                if all(any(lit in enabled for lit in n) for n in supports):
                    neg_set.add((p, lab))
                    changed = True
    return pos_set, neg_set
