"""Negative-conclusion completion of a TSS and ruloid enumeration by backward resolution."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .formats import check_rsbb_safe, Violation
from .terms import App, Var, apply, fresh_var, variables
from .tss import (TAU, TSS, Literal, Rule, RuleError, canonical, classify_rule, free_vars,
                  is_gamma_patient_rule, liquid_occurrences, lookahead_vars)

DEFAULT_DEPTH = 8


@dataclass(frozen=True)
class RuloidSet:
    source: object
    label: str
    positive: bool
    rules: Tuple[Rule, ...]
    complete: bool

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)


def _rename_apart(r: Rule, keep=()) -> Rule:
    s = {x: fresh_var(x.lstrip("%").rstrip("0123456789") or "v") for x in r.variables() if x not in keep}
    return r.subst(s)


# --- conversion to decent ntyft ---------------------------------------------------

def to_decent_ntyft(P: TSS, universe: Optional[Sequence] = None) -> TSS:
    """Instantiate variable sources per symbol and free variables over a closed-term universe."""
    out: List[Rule] = []
    for r in P.rules:
        flags = classify_rule(r)
        if "ntytt" not in flags or lookahead_vars(r):
            raise RuleError("rule %s is not in ready simulation format" % (r.name or r))
        rules = [r]
        if isinstance(r.source, Var):
            x = r.source.name
            rules = []
            for f, n in P.signature.items():
                args = tuple(fresh_var("x") for _ in range(n))
                inst = r.subst({x: App(f, args)})
                rules.append(Rule(inst.premises, inst.conclusion, "%s_%s" % (r.name, f) if r.name else ""))
        for q in rules:
            fv = sorted(free_vars(q))
            if not fv:
                out.append(q)
                continue
            if universe is None:
                raise RuleError("rule %s has free variables %s; supply a closed-term universe"
                                % (q.name or q, ", ".join(fv)))
            for k, combo in enumerate(itertools.product(list(universe), repeat=len(fv))):
                inst = q.subst(dict(zip(fv, combo)))
                out.append(Rule(inst.premises, inst.conclusion, "%s_%d" % (q.name, k) if q.name else ""))
    return P.replace(rules=[canonical(r) for r in out])


# --- P plus -------------------------------------------------------------------------

def _denial(h: Literal) -> Literal:
    if h.positive:
        return Literal(h.source, h.label, None)
    return Literal(h.source, h.label, fresh_var("z"))


def _contradictory(hs) -> bool:
    pos = {(h.source, h.label) for h in hs if h.positive}
    return any((h.source, h.label) in pos for h in hs if not h.positive)


def build_p_plus(P: TSS) -> TSS:
    """Add, for each symbol f and label, the negative-conclusion rules obtained by picking
    one premise from every rule for f and that label and denying each pick."""
    if not P.standard:
        raise RuleError("build_p_plus expects a standard TSS")
    extra: List[Rule] = []
    for f, n in P.signature.items():
        xs = tuple(Var("x%d" % k) for k in range(1, n + 1))
        src = App(f, xs)
        for a in P.labels:
            groups = []
            for r in P.rules_for(f, a):
                if not all(isinstance(t, Var) for t in r.source.args):
                    raise RuleError("rule %s is not ntyft" % (r.name or r))
                r2 = _rename_apart(r)
                r2 = r2.subst({t.name: x for t, x in zip(r2.source.args, xs)})
                groups.append(r2.premises)
            for pick in itertools.product(*groups):
                hs = [_denial(h) for h in pick]
                if _contradictory(hs):
                    continue
                rule = canonical(Rule.make(hs, Literal(src, a, None), "neg_%s_%s" % (f, a)),
                                 keep={x.name for x in xs})
                extra.append(rule)
    return P.replace(rules=list(P.rules) + extra)


# --- ruloids ------------------------------------------------------------------------

class RuloidEngine:
    """Backward resolution from a goal term to premises on its variables."""

    def __init__(self, Pplus: TSS, depth: int = DEFAULT_DEPTH):
        self.P = Pplus
        self.depth = depth
        self._cache: Dict = {}
        self._index: Dict = {}
        for r in Pplus.rules:
            if isinstance(r.source, App):
                self._index.setdefault((r.source.symbol, r.label, r.conclusion.positive), []).append(r)

    def ruloids(self, t, label: str, positive: bool = True) -> RuloidSet:
        key = (t, label, positive)
        if key not in self._cache:
            self._cache[key] = self._compute(t, label, positive)
        return self._cache[key]

    def _compute(self, t, label, positive) -> RuloidSet:
        flag = [True]
        keep = {x for x in variables(t)}
        seen = {}
        for hs, target in self._resolve(t, label, positive, self.depth, flag):
            if _contradictory(hs):
                continue
            concl = Literal(t, label, target if positive else None)
            r = Rule.make(hs, concl)
            if lookahead_vars(r) or free_vars(r):
                continue
            c = canonical(r, keep=keep)
            seen.setdefault(str(c), c)
        rules = tuple(seen[k] for k in sorted(seen))
        return RuloidSet(t, label, positive, rules, flag[0])

    def _resolve(self, t, label, positive, depth, flag):
        if isinstance(t, Var):
            if positive:
                y = fresh_var("y")
                yield [Literal(t, label, y)], y
            else:
                yield [Literal(t, label, None)], None
            return
        if depth <= 0:
            flag[0] = False
            return
        for r in self._index.get((t.symbol, label, positive), ()):
            r2 = _rename_apart(r)
            sigma = {x.name: u for x, u in zip(r2.source.args, t.args)}
            yield from self._premises(list(r2.premises), sigma, [], r2, depth, flag)

    def _premises(self, rest, sigma, acc, r, depth, flag):
        if not rest:
            tgt = apply(sigma, r.target) if r.conclusion.positive else None
            yield list(acc), tgt
            return
        h = rest[0]
        lhs = apply(sigma, h.source)
        for hs, tgt in self._resolve(lhs, h.label, h.positive, depth - 1, flag):
            s2 = dict(sigma)
            if h.positive:
                s2[h.target.name] = tgt
            yield from self._premises(rest[1:], s2, acc + hs, r, depth, flag)


def ruloids(Pplus: TSS, t, label: str, positive: bool = True, depth: int = DEFAULT_DEPTH) -> RuloidSet:
    return RuloidEngine(Pplus, depth).ruloids(t, label, positive)


def is_gamma_patient_ruloid(r: Rule, gamma) -> bool:
    return is_gamma_patient_rule(r, gamma)


# --- safety ---------------------------------------------------------------------------

def check_ruloid_safety(ruloid_sets, aleph, lam) -> List[Violation]:
    """Safety of every ruloid; negative-conclusion ruloids also need a v -tau-/> premise
    for each variable that is liquid for both predicates in the source."""
    gamma = frozenset(aleph) & frozenset(lam)
    out: List[Violation] = []
    for rs in ruloid_sets:
        for r in rs.rules:
            name = str(r)
            for v in check_rsbb_safe(r, aleph, lam):
                out.append(Violation(name, v.condition, v.detail))
            if not r.standard and r.label == TAU:
                for x in sorted(variables(r.source)):
                    if not liquid_occurrences(gamma, x, r.source)[0]:
                        continue
                    if not any(not h.positive and h.label == TAU and liquid_occurrences(gamma, x, h.source)[0]
                               for h in r.premises):
                        out.append(Violation(name, "negative-tau", "no premise v -tau-/> with %s liquid in v" % x))
    return out


def open_terms(P: TSS, max_ops: int = 2, constants: bool = False):
    """Terms over P's operators with at most max_ops operator occurrences; leaves are fresh
    variables (and constants when asked)."""
    ops = [(f, n) for f, n in P.signature.items() if n > 0]
    consts = [App(c, ()) for c, n in P.signature.items() if n == 0] if constants else []

    def build(k):
        # terms with exactly k operators, variables numbered later
        if k == 0:
            yield Var("?")
            for c in consts:
                yield c
            return
        for f, n in ops:
            for split in _compositions(k - 1, n):
                for args in itertools.product(*[list(build(m)) for m in split]):
                    yield App(f, tuple(args))

    out = []
    for k in range(0, max_ops + 1):
        for t in build(k):
            out.append(_number_vars(t))
    uniq = {str(t): t for t in out}
    return [uniq[k] for k in sorted(uniq, key=lambda s: (len(s), s))]


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _number_vars(t):
    counter = itertools.count(1)

    def walk(u):
        if isinstance(u, Var):
            return Var("x%d" % next(counter))
        return App(u.symbol, tuple(walk(a) for a in u.args))
    return walk(t)
