"""Finite labelled transition systems and reachability primitives."""

from __future__ import annotations

from collections import deque
from typing import Iterable, List, Optional, Sequence, Tuple

from .tss import TAU


class LTSError(Exception):
    pass


class LTS:
    """States are 0..n-1; transitions are (source, label, target) triples."""

    def __init__(self, n: int, transitions: Iterable[Tuple[int, str, int]] = (),
                 names: Optional[Sequence[str]] = None, initial: int = 0):
        self.n = n
        trans = set()
        for s, a, t in transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise LTSError("transition (%s,%s,%s) out of range" % (s, a, t))
            trans.add((s, a, t))
        self.transitions = tuple(sorted(trans))
        self.names = list(names) if names is not None else None
        if self.names is not None and len(self.names) != n:
            raise LTSError("expected %d state names, got %d" % (n, len(self.names)))
        if n and not 0 <= initial < n:
            raise LTSError("initial state %d out of range" % initial)
        self.initial = initial
        self.succ: List[List[Tuple[str, int]]] = [[] for _ in range(n)]
        self.tau_succ: List[List[int]] = [[] for _ in range(n)]
        for s, a, t in self.transitions:
            self.succ[s].append((a, t))
            if a == TAU:
                self.tau_succ[s].append(t)
        self._eps = None

    @property
    def labels(self):
        return sorted({a for _, a, _ in self.transitions})

    def name(self, s: int) -> str:
        return self.names[s] if self.names else str(s)

    def index(self, name: str) -> int:
        """State index from a display name or a decimal index."""
        if self.names and name in self.names:
            return self.names.index(name)
        try:
            s = int(name)
        except ValueError:
            raise LTSError("unknown state %r" % name) from None
        if not 0 <= s < self.n:
            raise LTSError("state %d out of range" % s)
        return s

    def eps(self, s: int) -> frozenset:
        if self._eps is None:
            self._eps = [None] * self.n
        if self._eps[s] is None:
            self._eps[s] = _reach(self.tau_succ, s, None)
        return self._eps[s]

    def __eq__(self, other):
        return (isinstance(other, LTS) and self.n == other.n
                and self.transitions == other.transitions and self.initial == other.initial)

    def __repr__(self):
        return "LTS(%d states, %d transitions)" % (self.n, len(self.transitions))


def _reach(tau_succ, s, allowed) -> frozenset:
    seen = {s}
    todo = deque([s])
    while todo:
        u = todo.popleft()
        for v in tau_succ[u]:
            if v not in seen and (allowed is None or v in allowed):
                seen.add(v)
                todo.append(v)
    return frozenset(seen)


def eps_closure(l: LTS, s: int) -> frozenset:
    return l.eps(s)


def inert_closure(l: LTS, s: int, allowed) -> frozenset:
    """States reachable from s by τ-steps that never leave allowed."""
    return _reach(l.tau_succ, s, allowed)


def is_stable(l: LTS, s: int) -> bool:
    return not l.tau_succ[s]


def diverging_core(l: LTS, allowed=None) -> frozenset:
    """Largest subset of allowed in which every state has a τ-successor inside it."""
    w = set(range(l.n)) if allowed is None else set(allowed)
    changed = True
    while changed:
        changed = False
        for s in list(w):
            if not any(t in w for t in l.tau_succ[s]):
                w.discard(s)
                changed = True
    return frozenset(w)


def divergent_states(l: LTS) -> frozenset:
    return diverging_core(l)


def divergent_within(l: LTS, s: int, allowed) -> bool:
    return s in diverging_core(l, allowed)


def disjoint_union(l1: LTS, l2: LTS) -> LTS:
    off = l1.n
    trans = list(l1.transitions) + [(s + off, a, t + off) for s, a, t in l2.transitions]
    names = None
    if l1.names is not None or l2.names is not None:
        names = [l1.name(s) for s in range(l1.n)] + [l2.name(s) for s in range(l2.n)]
    return LTS(l1.n + l2.n, trans, names, l1.initial)


def relabel(l: LTS, mapping, drop=()) -> LTS:
    """Rename labels through mapping and remove transitions whose label is in drop."""
    trans = [(s, mapping.get(a, a), t) for s, a, t in l.transitions if a not in drop]
    return LTS(l.n, trans, l.names, l.initial)
