"""Modal satisfaction, normal forms, logic classes and distinguishing formulas."""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Optional

from . import equiv
from .formula import BOT, TOP, Conj, DeltaMod, Diam, EpsDiam, Formula, Neg, TauHatDiam
from .lts import LTS, diverging_core
from .tss import TAU

CLASSES = ("O", "Ob", "Orb", "Obs", "Orbs")
CLASS_KIND = {"O": "strong", "Ob": "b", "Orb": "rb", "Obs": "sb", "Orbs": "rsb"}
STABLE = Neg(Diam(TAU, TOP))


class DistinguishError(Exception):
    """The formula construction disagreed with the computed partition."""


# --- satisfaction ------------------------------------------------------------

def _pred(l: LTS):
    pred = l.__dict__.get("_pred")
    if pred is None:
        pred = {}
        for s in range(l.n):
            for a, t in l.succ[s]:
                pred.setdefault((a, t), []).append(s)
        l._pred = pred
    return pred


def sat_set(l: LTS, phi: Formula) -> frozenset:
    """States satisfying phi; results are memoised on the LTS."""
    memo = l.__dict__.setdefault("_sat", {})
    out = memo.get(phi)
    if out is not None:
        return out
    every = frozenset(range(l.n))
    if isinstance(phi, Conj):
        out = every
        for p in phi.parts:
            out &= sat_set(l, p)
    elif isinstance(phi, Neg):
        out = every - sat_set(l, phi.body)
    elif isinstance(phi, Diam):
        pred = _pred(l)
        out = frozenset(s for t in sat_set(l, phi.body) for s in pred.get((phi.action, t), ()))
    elif isinstance(phi, EpsDiam):
        inner = sat_set(l, phi.body)
        out = frozenset(s for s in range(l.n) if l.eps(s) & inner)
    elif isinstance(phi, TauHatDiam):
        inner = sat_set(l, phi.body)
        out = inner | frozenset(s for s in range(l.n) if any(t in inner for t in l.tau_succ[s]))
    elif isinstance(phi, DeltaMod):
        out = diverging_core(l, sat_set(l, phi.body))
    else:
        raise TypeError("not a formula: %r" % (phi,))
    memo[phi] = out
    return out


def satisfies(l: LTS, s: int, phi: Formula) -> bool:
    return s in sat_set(l, phi)


# --- normal form ---------------------------------------------------------------

def _key(phi):
    return str(phi)


@lru_cache(maxsize=65536)
def normalize(phi: Formula) -> Formula:
    """Rewrite to the normal form the class recognizers expect.

    Rewrites, each satisfaction-preserving:
      nested conjunctions flatten; T conjuncts drop; duplicates merge; conjuncts sort;
      a conjunction holding F is F; a single conjunct stands alone;
      ~~x -> x; <a>F, <eps>F, <that>F, D F -> F;
      <eps><eps>x -> <eps>x; <eps><that>x -> <eps>x; <that><eps>x -> <eps>x;
      <eps>T -> T; <that>T -> T.
    An <eps> body with no <a>/<that> conjunct is read as padded with <that>T by the
    recognizers rather than by an explicit conjunct.
    """
    if isinstance(phi, Conj):
        parts = []
        for p in phi.parts:
            q = normalize(p)
            if isinstance(q, Conj):
                parts.extend(q.parts)
            else:
                parts.append(q)
        if BOT in parts:
            return BOT
        uniq = {_key(p): p for p in parts}
        parts = [uniq[k] for k in sorted(uniq)]
        if len(parts) == 1:
            return parts[0]
        return Conj(tuple(parts))
    body = normalize(phi.body)
    if isinstance(phi, Neg):
        if isinstance(body, Neg):
            return body.body
        return Neg(body)
    if body == BOT:
        return BOT
    if isinstance(phi, Diam):
        return Diam(phi.action, body)
    if isinstance(phi, EpsDiam):
        if body == TOP:
            return TOP
        if isinstance(body, (EpsDiam, TauHatDiam)):
            return normalize(EpsDiam(body.body))
        return EpsDiam(body)
    if isinstance(phi, TauHatDiam):
        if body == TOP:
            return TOP
        if isinstance(body, EpsDiam):
            return body
        return TauHatDiam(body)
    return DeltaMod(body)


# --- classes -------------------------------------------------------------------

def _parts(phi):
    return list(phi.parts) if isinstance(phi, Conj) else [phi]


@lru_cache(maxsize=65536)
def _member(phi: Formula, cls: str) -> bool:
    if cls == "O":
        return True
    rooted = cls in ("Orb", "Orbs")
    base = {"Orb": "Ob", "Orbs": "Obs"}.get(cls, cls)
    if isinstance(phi, Conj):
        return all(_member(p, cls) for p in phi.parts)
    if isinstance(phi, Neg):
        return _member(phi.body, cls)
    if rooted:
        if isinstance(phi, Diam):
            return _member(phi.body, base)
        return _member(phi, base)
    if isinstance(phi, EpsDiam):
        parts = _parts(phi.body)
        if all(_member(p, cls) for p in parts):
            return True
        for k, c in enumerate(parts):
            rest = parts[:k] + parts[k + 1:]
            if isinstance(c, Diam) and c.action != TAU or isinstance(c, TauHatDiam):
                if _member(c.body, cls) and all(_member(p, cls) for p in rest):
                    return True
            if cls == "Obs" and c == STABLE and all(_member(p, "Orbs") for p in rest):
                return True
        return False
    return False


def class_membership(phi: Formula, cls: str) -> bool:
    """Membership of normalize(phi) in one of the classes O, Ob, Orb, Obs, Orbs."""
    if cls not in CLASSES:
        raise ValueError("unknown class %r" % cls)
    from .formula import has_delta
    if has_delta(phi):
        return False
    return _member(normalize(phi), cls)


# --- distinguishing formulas ---------------------------------------------------

def _conj(fs):
    fs = list(fs)
    return fs[0] if len(fs) == 1 else Conj(tuple(fs))


class _Refiner:
    """Partition refinement that keeps, for every ordered pair of blocks (B, C),
    a formula true on all of B and false on all of C."""

    def __init__(self, l: LTS, kind: str):
        self.l = l
        self.kind = kind
        self.block = [0] * l.n
        self.nblocks = 1 if l.n else 0
        self.delta: Dict = {}

    def sep(self, b, c):
        return self.delta[(b, c)]

    def _violation(self):
        l, blk = self.l, self.block
        for p in range(l.n):
            for q in range(l.n):
                if p == q or blk[p] != blk[q]:
                    continue
                for a, p1 in l.succ[p]:
                    if self.kind == "strong":
                        if not any(b == a and blk[q1] == blk[p1] for b, q1 in l.succ[q]):
                            return "strong", p, q, a, p1
                        continue
                    if a == TAU and blk[p1] == blk[p]:
                        continue
                    if not any(blk[q1] == blk[p] and any(b == a and blk[q2] == blk[p1] for b, q2 in l.succ[q1])
                               for q1 in l.eps(q)):
                        return "step", p, q, a, p1
                if self.kind == "sb" and not l.tau_succ[p]:
                    if not any(blk[q1] == blk[p] and not l.tau_succ[q1] for q1 in l.eps(q)):
                        return "stable", p, q, None, None
        return None

    def _formula(self, v):
        l, blk = self.l, self.block
        how, p, q, a, p1 = v
        b = blk[p]
        if how == "strong":
            others = sorted({blk[q1] for c, q1 in l.succ[q] if c == a and blk[q1] != blk[p1]})
            return Diam(a, _conj(self.sep(blk[p1], c) for c in others))
        phi = _conj(self.sep(b, c) for c in sorted({blk[q1] for q1 in l.eps(q)} - {b}))
        if how == "stable":
            return EpsDiam(Conj((STABLE, phi)))
        targets = {blk[q2] for q1 in l.eps(q) for c, q2 in l.succ[q1] if c == a}
        psi = _conj(self.sep(blk[p1], c) for c in sorted(targets - {blk[p1]}))
        if a != TAU:
            return EpsDiam(Conj((phi, Diam(a, psi))))
        tilde = self.sep(blk[p1], b)
        return EpsDiam(Conj((phi, TauHatDiam(Conj((tilde, psi))))))

    def run(self):
        guard = self.l.n + 1
        while True:
            v = self._violation()
            if v is None:
                return
            guard -= 1
            if guard < 0:
                raise DistinguishError("refinement did not terminate")
            chi = self._formula(v)
            sat = sat_set(self.l, chi)
            b = self.block[v[1]]
            if v[1] not in sat or v[2] in sat:
                raise DistinguishError("constructed formula does not split the pair")
            nb = self.nblocks
            self.nblocks += 1
            for s in range(self.l.n):
                if self.block[s] == b and s not in sat:
                    self.block[s] = nb
            for c in range(nb):
                if c == b:
                    continue
                self.delta[(nb, c)] = self.delta[(b, c)]
                self.delta[(c, nb)] = self.delta[(c, b)]
            self.delta[(b, nb)] = chi
            self.delta[(nb, b)] = Neg(chi)


def _strip(phi):
    return phi.body if isinstance(phi, Neg) else phi


def distinguish(l: LTS, s1: int, s2: int, cls: str) -> Optional[Formula]:
    """A formula of class cls that exactly one of s1, s2 satisfies, or None if they are equivalent."""
    if cls not in CLASSES:
        raise ValueError("unknown class %r" % cls)
    kind = CLASS_KIND[cls]
    base = equiv.ROOTED.get(kind, kind)
    r = _Refiner(l, base)
    r.run()
    expect = equiv.coarsest(l, base)
    if equiv.Partition(r.block) != expect:
        raise DistinguishError("formula refinement disagrees with the %s partition" % base)
    blk = r.block
    if blk[s1] != blk[s2]:
        return normalize(_strip(r.sep(blk[s1], blk[s2])))
    if kind not in equiv.ROOTED:
        return None
    for p, q in ((s1, s2), (s2, s1)):
        for a, p1 in l.succ[p]:
            if any(b == a and blk[q1] == blk[p1] for b, q1 in l.succ[q]):
                continue
            others = sorted({blk[q1] for b, q1 in l.succ[q] if b == a})
            chi = Diam(a, _conj(r.sep(blk[p1], c) for c in others))
            return normalize(chi)
    return None
