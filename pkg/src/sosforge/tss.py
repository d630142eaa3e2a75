"""Literals, rules, transition system specifications and their syntactic classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Tuple

from .terms import App, Signature, Var, apply, var_occurrences, variables

TAU = "tau"
IOTA = "iota"
ORACLE_PREFIX = "@"

Predicate = FrozenSet[Tuple[str, int]]


class RuleError(Exception):
    """Rule outside the class an operation requires."""


@dataclass(frozen=True)
class Literal:
    source: object
    label: str
    target: Optional[object] = None

    @property
    def positive(self) -> bool:
        return self.target is not None

    def denies(self, other: "Literal") -> bool:
        return (
            self.source == other.source
            and self.label == other.label
            and self.positive != other.positive
        )

    def variables(self) -> frozenset:
        out = variables(self.source)
        if self.positive:
            out |= variables(self.target)
        return out

    def subst(self, s) -> "Literal":
        tgt = apply(s, self.target) if self.positive else None
        return Literal(apply(s, self.source), self.label, tgt)

    def sort_key(self):
        return (str(self.source), 0 if self.positive else 1, self.label, str(self.target))

    def __str__(self):
        if self.positive:
            return "%s -%s-> %s" % (self.source, self.label, self.target)
        return "%s -%s-/>" % (self.source, self.label)


def pos(source, label, target) -> Literal:
    return Literal(source, label, target)


def neg(source, label) -> Literal:
    return Literal(source, label, None)


@dataclass(frozen=True)
class Rule:
    premises: Tuple[Literal, ...]
    conclusion: Literal
    name: str = field(default="", compare=False)

    @staticmethod
    def make(premises: Iterable[Literal], conclusion: Literal, name: str = "") -> "Rule":
        prem = tuple(sorted(set(premises), key=Literal.sort_key))
        return Rule(prem, conclusion, name)

    @property
    def standard(self) -> bool:
        return self.conclusion.positive

    @property
    def source(self):
        return self.conclusion.source

    @property
    def target(self):
        return self.conclusion.target

    @property
    def label(self) -> str:
        return self.conclusion.label

    def positives(self):
        return [h for h in self.premises if h.positive]

    def negatives(self):
        return [h for h in self.premises if not h.positive]

    def variables(self) -> frozenset:
        out = self.conclusion.variables()
        for h in self.premises:
            out |= h.variables()
        return out

    def subst(self, s) -> "Rule":
        return Rule.make((h.subst(s) for h in self.premises), self.conclusion.subst(s), self.name)

    def __str__(self):
        return "%s |- %s" % (", ".join(str(h) for h in self.premises), self.conclusion)


class TSS:
    """A transition system specification with optional argument predicates."""

    def __init__(self, signature: Signature, actions: Iterable[str], rules: Iterable[Rule],
                 aleph: Optional[Iterable] = None, lam: Optional[Iterable] = None,
                 order: Iterable = (), infix: Iterable[str] = ()):
        self.signature = signature
        self.actions = tuple(sorted(set(actions) - {TAU}))
        uniq = {}
        for r in rules:
            uniq.setdefault(r, r)
        self.rules = tuple(sorted(uniq.values(), key=lambda r: str(canonical(r))))
        self.aleph = None if aleph is None else frozenset(aleph)
        self.lam = None if lam is None else frozenset(lam)
        self.order = frozenset(order)
        self.infix = frozenset(infix)
        for p in (self.aleph, self.lam):
            for f, i in p or ():
                if not 1 <= i <= signature.arity(f):
                    raise RuleError("predicate index %s.%d out of range" % (f, i))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.actions + (TAU,)

    @property
    def gamma(self) -> Optional[Predicate]:
        if self.aleph is None or self.lam is None:
            return None
        return self.aleph & self.lam

    def positions(self):
        return [(f, i) for f, n in self.signature.items() for i in range(1, n + 1)]

    def replace(self, **kw) -> "TSS":
        args = dict(signature=self.signature, actions=self.actions, rules=self.rules,
                    aleph=self.aleph, lam=self.lam, order=self.order, infix=self.infix)
        args.update(kw)
        return TSS(**args)

    def rules_for(self, symbol: str, label: str, positive: bool = True):
        return [r for r in self.rules
                if r.conclusion.positive == positive and r.label == label
                and isinstance(r.source, App) and r.source.symbol == symbol]

    @property
    def standard(self) -> bool:
        return all(r.standard for r in self.rules)

    def __eq__(self, other):
        return isinstance(other, TSS) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.signature, self.actions, frozenset(self.rules), self.aleph, self.lam,
                self.order, self.infix)

    def __repr__(self):
        return "TSS(%d rules, actions=%s)" % (len(self.rules), list(self.actions))


def universal(signature: Signature) -> Predicate:
    return frozenset((f, i) for f, n in signature.items() for i in range(1, n + 1))


# --- occurrences -----------------------------------------------------------

def path_liquid(pred, t, path) -> bool:
    u = t
    for i in path:
        if (u.symbol, i) not in pred:
            return False
        u = u.args[i - 1]
    return True


def liquid_occurrences(pred, x: str, t):
    """Split the occurrences of x in t into (liquid paths, frozen paths)."""
    liquid, frozen = [], []
    for y, path in var_occurrences(t):
        if y == x:
            (liquid if path_liquid(pred, t, path) else frozen).append(path)
    return liquid, frozen


def count_occ(pred, x, t):
    liq, fro = liquid_occurrences(pred, x, t)
    return len(liq), len(fro)


def rule_terms(r: Rule):
    """(role, term) for every term position of a rule."""
    yield "source", r.source
    for h in r.premises:
        yield "premise-lhs", h.source
        if h.positive:
            yield "premise-rhs", h.target
    if r.conclusion.positive:
        yield "target", r.target


# --- classification --------------------------------------------------------

def _distinct_vars(ts) -> bool:
    return all(isinstance(t, Var) for t in ts) and len({t.name for t in ts}) == len(ts)


def is_ntytt(r: Rule) -> bool:
    rhs = [h.target for h in r.positives()]
    if not _distinct_vars(rhs):
        return False
    src = variables(r.source)
    return not any(y.name in src for y in rhs)


def lookahead_vars(r: Rule) -> frozenset:
    rhs = set()
    for h in r.positives():
        rhs |= variables(h.target)
    lhs = set()
    for h in r.premises:
        lhs |= variables(h.source)
    return frozenset(rhs & lhs)


def free_vars(r: Rule) -> frozenset:
    bound = set(variables(r.source))
    for h in r.positives():
        bound |= variables(h.target)
    return frozenset(r.variables() - bound)


def classify_rule(r: Rule) -> frozenset:
    flags = set()
    if r.standard:
        flags.add("standard")
    if is_ntytt(r):
        flags.add("ntytt")
        if isinstance(r.source, Var):
            flags.add("ntyxt")
        elif _distinct_vars(r.source.args):
            flags.add("ntyft")
        if all(isinstance(h.source, Var) for h in r.premises):
            flags.add("nxytt")
    if not lookahead_vars(r):
        flags.add("lookahead-free")
        if not free_vars(r):
            flags.add("decent")
    return frozenset(flags)


# --- patience --------------------------------------------------------------

def patience_rule(f: str, arity: int, i: int) -> Rule:
    xs = [Var("x%d" % k) for k in range(1, arity + 1)]
    y = Var("y")
    tgt = list(xs)
    tgt[i - 1] = y
    return Rule.make([pos(xs[i - 1], TAU, y)],
                     pos(App(f, tuple(xs)), TAU, App(f, tuple(tgt))),
                     "patience-%s-%d" % (f, i))


def is_patience_rule(r: Rule, gamma) -> bool:
    if len(r.premises) != 1 or not r.standard or r.label != TAU:
        return False
    h = r.premises[0]
    if not h.positive or h.label != TAU:
        return False
    if not isinstance(h.source, Var) or not isinstance(h.target, Var):
        return False
    s, u = r.source, r.target
    if not isinstance(s, App) or not isinstance(u, App) or s.symbol != u.symbol:
        return False
    if not _distinct_vars(s.args) or h.target in s.args:
        return False
    diff = [i for i, (a, b) in enumerate(zip(s.args, u.args), 1) if a != b]
    if len(diff) != 1:
        return False
    i = diff[0]
    return (s.symbol, i) in gamma and s.args[i - 1] == h.source and u.args[i - 1] == h.target


def is_gamma_patient_tss(P: TSS, gamma=None):
    """Return (ok, missing positions) for the requirement that P holds every Γ-patience rule."""
    gamma = P.gamma if gamma is None else gamma
    have = {(r.source.symbol, i) for r in P.rules for i in _patience_positions(r, gamma)}
    missing = sorted(set(gamma or ()) - have)
    return not missing, missing


def _patience_positions(r, gamma):
    if is_patience_rule(r, gamma):
        diff = [i for i, (a, b) in enumerate(zip(r.source.args, r.target.args), 1) if a != b]
        return diff
    return []


def patience_positions(P: TSS) -> frozenset:
    """Positions (f, i) for which P contains a patience rule."""
    everything = universal(P.signature)
    return frozenset(
        (r.source.symbol, i) for r in P.rules for i in _patience_positions(r, everything)
    )


def is_gamma_patient_rule(r: Rule, gamma) -> bool:
    """Is r irredundantly provable from the Γ-patience rules alone?"""
    if len(r.premises) != 1 or not r.standard or r.label != TAU:
        return False
    h = r.premises[0]
    if not h.positive or h.label != TAU:
        return False
    s, u = r.source, r.target
    while (s, u) != (h.source, h.target):
        if not isinstance(s, App) or not isinstance(u, App) or s.symbol != u.symbol:
            return False
        diff = [i for i, (a, b) in enumerate(zip(s.args, u.args), 1) if a != b]
        if len(diff) != 1 or (s.symbol, diff[0]) not in gamma:
            return False
        s, u = s.args[diff[0] - 1], u.args[diff[0] - 1]
    return True


# --- canonical renaming ----------------------------------------------------

def canonical(r: Rule, keep=frozenset()) -> Rule:
    """Rename the variables of r (except those in keep) to a canonical numbering."""
    keep = frozenset(keep)
    pool = (n for n in ("_%d" % k for k in range(10**6)) if n not in keep)
    pool = list(_take(pool, len(r.variables()) + 1))

    def assign(names, t):
        for x, _ in var_occurrences(t):
            if x not in names:
                names[x] = x if x in keep else pool[sum(1 for y in names if y not in keep)]
        return names

    def masked(names, lit):
        m = {x: Var(n) for x, n in names.items()}
        hole = Var("?")
        def mask(t):
            return apply({**{x: hole for x in variables(t)}, **m}, t)
        if lit.positive:
            return "%s -%s-> %s" % (mask(lit.source), lit.label, mask(lit.target))
        return "%s -%s-/>" % (mask(lit.source), lit.label)

    best = [None]

    def finish(names):
        names = dict(names)
        if r.conclusion.positive:
            assign(names, r.target)
        s = {x: Var(n) for x, n in names.items()}
        cand = r.subst(s)
        key = str(cand)
        if best[0] is None or key < best[0][0]:
            best[0] = (key, cand)

    def search(names, rest):
        if not rest:
            finish(names)
            return
        keys = [(masked(names, h), k) for k, h in enumerate(rest)]
        low = min(k for k, _ in keys)
        for key, k in keys:
            if key != low:
                continue
            nn = dict(names)
            h = rest[k]
            assign(nn, h.source)
            if h.positive:
                assign(nn, h.target)
            search(nn, rest[:k] + rest[k + 1:])

    start = assign({}, r.source)
    search(start, list(r.premises))
    out = best[0][1]
    return Rule(out.premises, out.conclusion, r.name)


def _take(it, n):
    for _ in range(n):
        yield next(it)
