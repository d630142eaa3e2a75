"""Strong and branching-bisimulation equivalences as coarsest partitions."""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence

from .lts import LTS, diverging_core, divergent_states, inert_closure
from .tss import TAU

BASE_KINDS = ("strong", "b", "sb", "wdb", "db")
ROOTED = {"rb": "b", "rsb": "sb", "rwdb": "wdb", "rdb": "db"}
KINDS = BASE_KINDS + tuple(ROOTED)
CHAIN = ("b", "sb", "wdb", "db")


class Partition:
    """State-to-block map with blocks numbered by first occurrence."""

    def __init__(self, ids: Sequence):
        canon: Dict = {}
        self.ids = tuple(canon.setdefault(b, len(canon)) for b in ids)

    @property
    def n(self):
        return len(self.ids)

    def block(self, s) -> int:
        return self.ids[s]

    def related(self, s, t) -> bool:
        return self.ids[s] == self.ids[t]

    def blocks(self) -> List[frozenset]:
        out: List[set] = [set() for _ in range(len(set(self.ids)))]
        for s, b in enumerate(self.ids):
            out[b].add(s)
        return [frozenset(b) for b in out]

    def count(self) -> int:
        return len(set(self.ids))

    def refines(self, other: "Partition") -> bool:
        """Every block of self lies inside a block of other."""
        seen = {}
        for a, b in zip(self.ids, other.ids):
            if seen.setdefault(a, b) != b:
                return False
        return True

    def as_text(self, l: Optional[LTS] = None) -> str:
        return "".join("%s\t%d\n" % (l.name(s) if l else s, b) for s, b in enumerate(self.ids))

    def __eq__(self, other):
        return isinstance(other, Partition) and self.ids == other.ids

    def __hash__(self):
        return hash(self.ids)

    def __repr__(self):
        return "Partition(%s)" % (self.blocks(),)


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError("unknown equivalence kind %r (expected one of %s)" % (kind, ", ".join(KINDS)))


# --- production: signature refinement --------------------------------------

def _refine(l: LTS, ids, signature):
    count = len(set(ids))
    while True:
        sigs = signature(ids)
        new = Partition([(ids[s], sigs[s]) for s in range(l.n)]).ids
        c = len(set(new))
        ids = new
        if c == count:
            return ids
        count = c


def _strong_sig(l, ids):
    return [frozenset((a, ids[t]) for a, t in l.succ[s]) for s in range(l.n)]


def _branching_sig(l, ids, stability=False, block_div=False):
    members: Dict[int, set] = {}
    for s, b in enumerate(ids):
        members.setdefault(b, set()).add(s)
    div = set()
    if block_div:
        for m in members.values():
            div |= diverging_core(l, m)
    out = []
    for s in range(l.n):
        inert = inert_closure(l, s, members[ids[s]])
        sig = set()
        for u in inert:
            for a, t in l.succ[u]:
                if not (a == TAU and ids[t] == ids[s]):
                    sig.add((a, ids[t]))
        flags = ()
        if stability:
            flags += (any(not l.tau_succ[u] for u in inert),)
        if block_div:
            flags += (s in div,)
        out.append((frozenset(sig), flags))
    return out


def coarsest(l: LTS, kind: str) -> Partition:
    _check_kind(kind)
    if kind in ROOTED:
        base = coarsest(l, ROOTED[kind])
        return Partition(_strong_sig(l, base.ids))
    ids = (0,) * l.n
    if kind == "strong":
        return Partition(_refine(l, ids, lambda i: _strong_sig(l, i)))
    if kind == "wdb":
        div = divergent_states(l)
        ids = Partition([s in div for s in range(l.n)]).ids
    opts = dict(stability=kind == "sb", block_div=kind == "db")
    return Partition(_refine(l, ids, lambda i: _branching_sig(l, i, **opts)))


def related(l: LTS, kind: str, s1: int, s2: int) -> bool:
    return coarsest(l, kind).related(s1, s2)


def rooted(l: LTS, kind: str, s1: int, s2: int) -> bool:
    """Rooted variant of kind (given either as base or rooted name) on the pair."""
    if kind in ROOTED:
        kind = ROOTED[kind]
    if kind not in BASE_KINDS or kind == "strong":
        raise ValueError("no rooted variant for %r" % kind)
    base = coarsest(l, kind)
    sig = _strong_sig(l, base.ids)
    return sig[s1] == sig[s2]


# --- oracle: exhaustive partition search ------------------------------------

def _set_partitions(n):
    """Restricted growth strings of length n."""
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(mx + 2):
            prefix.append(b)
            yield from rec(prefix, max(mx, b))
            prefix.pop()
    if n == 0:
        yield ()
        return
    yield from rec([0], 0)


def _is_bisim(l: LTS, ids, kind) -> bool:
    n = l.n
    blocks: Dict[int, set] = {}
    for s, b in enumerate(ids):
        blocks.setdefault(b, set()).add(s)
    glob_div = divergent_states(l) if kind == "wdb" else frozenset()
    in_div = {}
    if kind == "db":
        for b, m in blocks.items():
            core = diverging_core(l, m)
            for s in m:
                in_div[s] = s in core
    for p in range(n):
        for q in range(n):
            if ids[p] != ids[q] or p == q:
                continue
            for a, p1 in l.succ[p]:
                if kind == "strong":
                    if not any(b == a and ids[q1] == ids[p1] for b, q1 in l.succ[q]):
                        return False
                    continue
                if a == TAU and ids[p1] == ids[q]:
                    continue
                ok = any(ids[q1] == ids[p] and any(b == a and ids[q2] == ids[p1] for b, q2 in l.succ[q1])
                         for q1 in l.eps(q))
                if not ok:
                    return False
            if kind == "sb" and not l.tau_succ[p]:
                if not any(ids[q1] == ids[p] and not l.tau_succ[q1] for q1 in l.eps(q)):
                    return False
            if kind == "wdb" and p in glob_div and q not in glob_div:
                return False
            if kind == "db" and in_div[p] and not in_div[q]:
                return False
    return True


def oracle_coarsest(l: LTS, kind: str, max_states: int = 6) -> Partition:
    """Coarsest partition found by trying every partition, fewest blocks first."""
    _check_kind(kind)
    if l.n > max_states:
        raise ValueError("oracle limited to %d states" % max_states)
    if kind in ROOTED:
        base = oracle_coarsest(l, ROOTED[kind], max_states)
        return _rooted_oracle(l, base)
    cands = sorted(_set_partitions(l.n), key=lambda ids: (len(set(ids)), ids))
    for ids in cands:
        if _is_bisim(l, ids, kind):
            return Partition(ids)
    raise AssertionError("identity partition must qualify")


def _rooted_oracle(l: LTS, base: Partition) -> Partition:
    def matched(p, q):
        return all(any(b == a and base.related(p1, q1) for b, q1 in l.succ[q]) for a, p1 in l.succ[p])

    rel = [[matched(p, q) and matched(q, p) for q in range(l.n)] for p in range(l.n)]
    ids = []
    for p in range(l.n):
        ids.append(next(q for q in range(l.n) if rel[p][q]))
    for p in range(l.n):
        for q in range(l.n):
            if rel[p][q] != (ids[p] == ids[q]):
                raise AssertionError("rooted relation is not an equivalence")
    return Partition(ids)


def inclusion_chain_check(l: LTS, part=coarsest) -> dict:
    """Check that each equivalence in the chain refines its predecessor."""
    parts = {k: part(l, k) for k in CHAIN}
    for coarse, fine in zip(CHAIN, CHAIN[1:]):
        if not parts[fine].refines(parts[coarse]):
            for s in range(l.n):
                for t in range(l.n):
                    if parts[fine].related(s, t) and not parts[coarse].related(s, t):
                        return {"ok": False, "violation": (fine, coarse, s, t), "partitions": parts}
    strict = [(c, f) for c, f in zip(CHAIN, CHAIN[1:]) if parts[c] != parts[f]]
    return {"ok": True, "violation": None, "strict": strict, "partitions": parts}


def random_lts(rng: random.Random, max_states: int = 6, labels=("a", "b", TAU),
               density: float = 0.25) -> LTS:
    n = rng.randint(1, max_states)
    trans = [(s, a, t) for s in range(n) for a in labels for t in range(n) if rng.random() < density / len(labels) * 2]
    return LTS(n, trans)
