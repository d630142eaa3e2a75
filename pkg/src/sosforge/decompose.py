"""Modal decomposition: formulas for an open term mapped to formulas for its variables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .formula import BOT, TOP, Conj, DeltaMod, Diam, EpsDiam, Formula, Neg, TauHatDiam
from .modal import class_membership, normalize, satisfies
from .proofs import generate_lts
from .ruloids import DEFAULT_DEPTH, RuloidEngine, build_p_plus, to_decent_ntyft
from .terms import App, Var, apply, var_occurrences, variables
from .tss import TAU, TSS, Rule, is_gamma_patient_rule, liquid_occurrences, patience_positions

DEFAULT_CAP = 64
DEFAULT_GUARD = 16


class DecompositionError(Exception):
    pass


@dataclass(frozen=True)
class Mapping:
    """Variable-to-formula assignment; variables not listed map to T."""
    items: Tuple[Tuple[str, Formula], ...] = ()

    @staticmethod
    def of(d) -> Optional["Mapping"]:
        """Normalized mapping, or None when some component is F."""
        out = {}
        for x, f in d.items():
            g = normalize(f)
            if g == BOT:
                return None
            if g != TOP:
                out[x] = g
        return Mapping(tuple(sorted(out.items(), key=lambda kv: kv[0])))

    def get(self, x) -> Formula:
        for y, f in self.items:
            if y == x:
                return f
        return TOP

    def domain(self):
        return [x for x, _ in self.items]

    def as_dict(self):
        return dict(self.items)

    def __str__(self):
        if not self.items:
            return "(all T)"
        return "\n".join("%s := %s" % (x, f) for x, f in self.items)


def _conjuncts(f) -> tuple:
    return f.parts if isinstance(f, Conj) else (f,)


def weakest(maps) -> FrozenSet[Mapping]:
    """Drop every mapping whose components each contain all conjuncts of another's.

    Such a mapping is stronger at every variable, so the disjunction over the set is unchanged.
    """
    flat = {m: frozenset((x, c) for x, f in m.items for c in _conjuncts(f)) for m in set(maps)}
    # a strictly weaker mapping has strictly fewer conjuncts, so it is seen first
    kept: List[Tuple[Mapping, frozenset]] = []
    for m in sorted(flat, key=lambda m: len(flat[m])):
        cs = flat[m]
        if any(cs >= kc for _, kc in kept):
            continue
        kept.append((m, cs))
    return frozenset(m for m, _ in kept)


def _univariate(t) -> bool:
    names = [x for x, _ in var_occurrences(t)]
    return len(names) == len(set(names))


def _linearize(t):
    """Univariate t' and the renaming sigma with sigma(t') = t."""
    counts: Dict[str, int] = {}
    sigma: Dict[str, str] = {}

    def walk(u):
        if isinstance(u, Var):
            k = counts.get(u.name, 0)
            counts[u.name] = k + 1
            name = u.name if k == 0 else "%s#%d" % (u.name, k)
            sigma[name] = u.name
            return Var(name)
        return App(u.symbol, tuple(walk(a) for a in u.args))
    return walk(t), sigma


class Decomposer:
    """Decomposition of formulas for terms over a patient TSS in ready simulation format."""

    def __init__(self, P: TSS, gamma=None, depth: int = DEFAULT_DEPTH, cap: int = DEFAULT_CAP,
                 guard: int = DEFAULT_GUARD):
        self.P = P
        self.gamma = frozenset(patience_positions(P) if gamma is None else gamma)
        self.engine = RuloidEngine(build_p_plus(to_decent_ntyft(P)), depth)
        self.cap = cap
        self.guard = guard
        self._memo: Dict = {}
        self._open: Dict = {}
        self._stack: List = []
        self._impatient: Dict = {}

    # -- helpers --

    def _ruloids(self, t, label):
        rs = self.engine.ruloids(t, label, True)
        if not rs.complete:
            raise DecompositionError("ruloid search for %s -%s-> hit the depth bound" % (t, label))
        return rs.rules

    def _impatient_tau(self, t):
        if t not in self._impatient:
            self._impatient[t] = [r for r in self._ruloids(t, TAU)
                                  if not is_gamma_patient_rule(r, self.gamma)]
        return self._impatient[t]

    def _liquid(self, x, t) -> bool:
        return bool(liquid_occurrences(self.gamma, x, t)[0])

    @staticmethod
    def _with_premises(x, r: Rule, chi: Mapping) -> Formula:
        parts = [chi.get(x)]
        for h in r.premises:
            if h.source != Var(x):
                continue
            if h.positive:
                parts.append(Diam(h.label, chi.get(h.target.name)))
            else:
                parts.append(Neg(Diam(h.label, TOP)))
        return Conj(tuple(parts))

    # -- entry --

    def decompose(self, t, phi: Formula) -> FrozenSet[Mapping]:
        phi = normalize(phi)
        key = (t, phi)
        if key in self._memo:
            return self._memo[key]
        if key in self._open:
            for frame in self._stack[self._stack.index(key) + 1:]:
                self._open[frame][1] = True
            self._open[key][2] = True
            return self._open[key][0]
        if sum(1 for k in self._stack if isinstance(k[1], EpsDiam)) > self.guard:
            raise DecompositionError("decomposition of %s for %s exceeds the recursion guard" % (phi, t))
        self._open[key] = [frozenset(), False, False]
        self._stack.append(key)
        try:
            for _ in range(self.guard + 1):
                self._open[key][2] = False
                res = weakest(self._compute(t, phi))
                if not self._open[key][2] or res == self._open[key][0]:
                    break
                self._open[key][0] = res
            else:
                raise DecompositionError("decomposition of %s for %s does not stabilise" % (phi, t))
        finally:
            self._stack.pop()
            tainted = self._open.pop(key)[1]
        if not tainted:
            self._memo[key] = res
        return res

    def _negate(self, sub, vs):
        """Mappings psi_h for every h: sub -> vs, built one chi at a time and kept minimal."""
        partial = {Mapping()}
        for chi in sub:
            nxt = set()
            for m in partial:
                for x in vs:
                    if chi.get(x) == TOP:
                        continue
                    n = Mapping.of({y: Conj((m.get(y), Neg(chi.get(x)))) if y == x else m.get(y) for y in vs})
                    if n is not None:
                        nxt.add(n)
            partial = weakest(nxt)
            if not partial:
                break
        return frozenset(partial)

    def _compute(self, t, phi) -> FrozenSet[Mapping]:
        if isinstance(phi, DeltaMod) or any(isinstance(f, DeltaMod) for f in _sub(phi)):
            raise DecompositionError("formulas with the divergence modality cannot be decomposed")
        if not _univariate(t):
            lin, sigma = _linearize(t)
            out = set()
            for chi in self.decompose(lin, phi):
                d: Dict[str, list] = {}
                for z, x in sigma.items():
                    d.setdefault(x, []).append(chi.get(z))
                m = Mapping.of({x: Conj(tuple(fs)) for x, fs in d.items()})
                if m is not None:
                    out.add(m)
            return frozenset(out)
        vs = sorted(variables(t))
        if isinstance(phi, Conj):
            acc = {Mapping()}
            for part in phi.parts:
                sub = self.decompose(t, part)
                nxt = set()
                for m1 in acc:
                    for m2 in sub:
                        m = Mapping.of({x: Conj((m1.get(x), m2.get(x))) for x in vs})
                        if m is not None:
                            nxt.add(m)
                acc = nxt
                if not acc:
                    break
            return frozenset(acc)
        if isinstance(phi, Neg):
            sub = sorted(self.decompose(t, phi.body), key=str)
            if len(sub) > self.cap:
                raise DecompositionError("negation over %d mappings exceeds the cap %d" % (len(sub), self.cap))
            # h may only send chi to x with chi(x) != T, otherwise psi(x) is F
            return self._negate(sub, vs)
        if isinstance(phi, Diam):
            out = set()
            for r in self._ruloids(t, phi.action):
                for chi in self.decompose(r.target, phi.body):
                    m = Mapping.of({x: self._with_premises(x, r, chi) for x in vs})
                    if m is not None:
                        out.add(m)
            return frozenset(out)
        if isinstance(phi, EpsDiam):
            out = set()
            for chi in self.decompose(t, phi.body):
                m = Mapping.of({x: EpsDiam(chi.get(x)) if self._liquid(x, t) else chi.get(x) for x in vs})
                if m is not None:
                    out.add(m)
            for r in self._impatient_tau(t):
                for chi in self.decompose(r.target, phi):
                    d = {}
                    for x in vs:
                        f = self._with_premises(x, r, chi)
                        d[x] = EpsDiam(f) if self._liquid(x, t) else f
                    m = Mapping.of(d)
                    if m is not None:
                        out.add(m)
            return frozenset(out)
        if isinstance(phi, TauHatDiam):
            base = self.decompose(t, phi.body)
            out = set(base)
            for x0 in vs:
                if not self._liquid(x0, t):
                    continue
                for chi in base:
                    m = Mapping.of({x: TauHatDiam(chi.get(x)) if x == x0 else chi.get(x) for x in vs})
                    if m is not None:
                        out.add(m)
            for r in self._impatient_tau(t):
                for chi in self.decompose(r.target, phi.body):
                    m = Mapping.of({x: self._with_premises(x, r, chi) for x in vs})
                    if m is not None:
                        out.add(m)
            return frozenset(out)
        raise TypeError("not a formula: %r" % (phi,))


def _sub(phi):
    from .formula import subformulas
    return subformulas(phi)


def decompose(P: TSS, t, phi: Formula, gamma=None, depth: int = DEFAULT_DEPTH,
              cap: int = DEFAULT_CAP, guard: int = DEFAULT_GUARD) -> List[Mapping]:
    d = Decomposer(P, gamma, depth, cap, guard)
    return sorted(d.decompose(t, phi), key=str)


# --- verification ---------------------------------------------------------------------

def _substitutions(vs, universe):
    for combo in itertools.product(list(universe), repeat=len(vs)):
        yield dict(zip(vs, combo))


def closed_instances(terms, universe):
    out = []
    for t in terms:
        vs = sorted(variables(t))
        for rho in _substitutions(vs, universe):
            out.append(apply(rho, t))
    return out


def verify_decomposition_theorem(P: TSS, t, phi: Formula, universe: Sequence, decomposer=None,
                                 lts=None) -> dict:
    """Check rho(t) |= phi  <=>  some psi has rho(x) |= psi(x) for all x, for every rho into universe."""
    dec = decomposer or Decomposer(P)
    maps = dec.decompose(t, phi)
    vs = sorted(variables(t))
    if lts is None:
        lts = generate_lts(P, list(universe) + closed_instances([t], universe))
    bad = []
    checked = 0
    for rho in _substitutions(vs, universe):
        checked += 1
        lhs = satisfies(lts, lts.state(apply(rho, t)), phi)
        rhs = any(all(satisfies(lts, lts.state(rho[x]), m.get(x)) for x in vs) for m in maps)
        if lhs != rhs:
            bad.append({"rho": {x: str(u) for x, u in rho.items()}, "lhs": lhs, "rhs": rhs})
    return {"ok": not bad, "term": str(t), "formula": str(phi), "mappings": len(maps),
            "substitutions": checked, "counterexamples": bad}


def _only(pred, x, t, liquid=True):
    liq, fro = liquid_occurrences(pred, x, t)
    return bool(liq) and not fro if liquid else bool(fro) and not liq


def verify_class_preservation(P: TSS, aleph, lam, t, phi: Formula, decomposer=None) -> dict:
    """Check the class each decomposition component must fall in, given phi's class and
    how each variable occurs in t."""
    aleph, lam = frozenset(aleph), frozenset(lam)
    dec = decomposer or Decomposer(P, aleph & lam)
    in_b = class_membership(phi, "Obs")
    in_rb = class_membership(phi, "Orbs")
    bad = []
    checks = 0
    if in_b or in_rb:
        for m in dec.decompose(t, phi):
            for x in sorted(variables(t)):
                f = m.get(x)
                need = []
                if in_b and _only(lam, x, t):
                    need.append(("1", "Obs"))
                if in_rb:
                    need.append(("2", "Orbs"))
                    if _only(lam, x, t) and _only(aleph, x, t, liquid=False):
                        need.append(("3", "Obs"))
                for claim, cls in need:
                    checks += 1
                    if not class_membership(f, cls):
                        bad.append({"claim": claim, "class": cls, "variable": x, "formula": str(f)})
    return {"ok": not bad, "term": str(t), "formula": str(phi), "checks": checks, "violations": bad}


def battery() -> List[Formula]:
    """Twenty fixed formulas over actions a, b and tau."""
    T = TOP
    a, b = (lambda f: Diam("a", f)), (lambda f: Diam("b", f))
    tau = lambda f: Diam(TAU, f)
    stable = Neg(tau(T))
    E, H = EpsDiam, TauHatDiam
    return [
        T,
        a(T),
        Neg(a(T)),
        tau(T),
        stable,
        a(a(T)),
        E(a(T)),
        E(Conj((stable, a(T)))),
        E(stable),
        H(a(T)),
        E(H(E(a(T)))),
        Neg(E(a(T))),
        Conj((a(T), tau(T))),
        E(Conj((a(T), b(T)))),
        b(T),
        E(Conj((Neg(a(T)), H(E(a(T)))))),
        H(stable),
        E(Conj((stable, Neg(a(T))))),
        tau(E(Conj((stable, a(T))))),
        Neg(E(Conj((stable, a(E(stable)))))),
    ]


def battery_terms(P: TSS, max_ops: int = 2) -> List:
    """Terms with up to max_ops operators and variable leaves, allowing repeated variables."""
    from .ruloids import open_terms
    out = {}
    for t in open_terms(P, max_ops):
        leaves = [x for x, _ in var_occurrences(t)]
        for rgs in _rgs(len(leaves)):
            s = iter(rgs)
            u = _relabel(t, s)
            out[str(u)] = u
    return [out[k] for k in sorted(out, key=lambda s: (len(s), s))]


def _rgs(n):
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(mx + 2):
            yield from rec(prefix + [b], max(mx, b))
    if n == 0:
        yield ()
    else:
        yield from rec([0], 0)


def _relabel(t, it):
    if isinstance(t, Var):
        return Var("x%d" % (next(it) + 1))
    return App(t.symbol, tuple(_relabel(a, it) for a in t.args))
