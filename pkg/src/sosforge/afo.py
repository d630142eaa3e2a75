"""Oracle transformation towards an abstraction-free TSS, its decoding, and congruence checks."""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from . import equiv
from .formats import check_format
from .lts import LTS, disjoint_union, divergent_states
from .proofs import IncompleteTSS, TermLTS, generate_lts
from .terms import App, Signature, Var
from .tss import (IOTA, ORACLE_PREFIX, TAU, TSS, Literal, Rule, RuleError, canonical, classify_rule,
                  is_gamma_patient_tss, is_patience_rule, patience_positions)

log = logging.getLogger(__name__)

DIVERGENCE = ORACLE_PREFIX + "Dtop"
KIND_PAIRS = (("wdb", "sb"), ("rwdb", "rsb"), ("db", "sb"), ("rdb", "rsb"))


class AfoError(Exception):
    pass


@dataclass
class OracleSpec:
    """Oracle labels and the partial map from closed terms to them."""
    kind: str
    labels: tuple
    zeta: Dict = field(default_factory=dict)

    def __post_init__(self):
        for o in self.labels:
            if not o.startswith(ORACLE_PREFIX):
                raise AfoError("oracle label %r lacks the %r prefix" % (o, ORACLE_PREFIX))
        stray = set(self.zeta.values()) - set(self.labels)
        if stray:
            raise AfoError("oracle values %s are not declared labels" % sorted(stray))


def no_oracle() -> OracleSpec:
    return OracleSpec("none", ())


def divergence_oracle(G: LTS, terms=None) -> OracleSpec:
    """The label @Dtop on exactly the divergent states of G."""
    terms = G.terms if terms is None else terms
    div = divergent_states(G)
    return OracleSpec("divergence", (DIVERGENCE,), {terms[s]: DIVERGENCE for s in sorted(div)})


def class_naming_oracle(G: LTS, terms=None) -> OracleSpec:
    """One label @c<k> per divergence-preserving branching bisimulation class of G."""
    terms = G.terms if terms is None else terms
    part = equiv.coarsest(G, "db")
    labels = tuple("%sc%d" % (ORACLE_PREFIX, k) for k in range(part.count()))
    return OracleSpec("class-naming", labels, {terms[s]: labels[part.block(s)] for s in range(G.n)})


ORACLES = {"divergence": divergence_oracle, "class-naming": class_naming_oracle, "none": None}


@dataclass
class AfoResult:
    tss: TSS
    G: TermLTS
    H: LTS
    gamma: frozenset
    oracle: OracleSpec
    hats: Dict            # closed term of P -> hat constant name
    sqrt: str
    source: TSS

    def hat(self, t) -> App:
        return App(self.hats[t], ())

    def unhat(self):
        return {name: t for t, name in self.hats.items()}


# --- the transformation ---------------------------------------------------------

def _fresh_name(base, taken):
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def _iota_copies(r: Rule) -> List[Rule]:
    """r and a copy per non-empty subset of its positive tau-premises relabelled iota."""
    taus = [k for k, h in enumerate(r.premises) if h.positive and h.label == TAU]
    out = [r]
    for n in range(1, len(taus) + 1):
        for S in itertools.combinations(taus, n):
            prem = [Literal(h.source, IOTA, h.target) if k in S else h for k, h in enumerate(r.premises)]
            out.append(Rule.make(prem, r.conclusion, r.name + "_i" + "".join(str(k) for k in S) if r.name else ""))
    return out


def _abstract(r: Rule, gamma) -> Rule:
    if r.label == TAU and not is_patience_rule(r, gamma):
        c = r.conclusion
        return Rule.make(r.premises, Literal(c.source, IOTA, c.target), r.name)
    return r


def _block_iota(r: Rule) -> Rule:
    extra = [Literal(h.source, IOTA, None) for h in r.premises if not h.positive and h.label == TAU]
    if not extra:
        return r
    return Rule.make(list(r.premises) + extra, r.conclusion, r.name)


def transform_rules(P: TSS, gamma) -> List[Rule]:
    """Steps on the rules of P alone: iota copies, iota conclusions, blocked iota."""
    R1 = [c for r in P.rules for c in _iota_copies(r)]
    R2 = [_abstract(r, gamma) for r in R1]
    return [_block_iota(r) for r in R2]


def _check_input(P: TSS, gamma):
    if not P.standard:
        raise RuleError("the oracle transformation needs a standard TSS")
    for r in P.rules:
        flags = classify_rule(r)
        if "ntyft" not in flags or "decent" not in flags:
            raise RuleError("rule %s is not decent ntyft" % (r.name or r))
        for h in r.premises:
            if h.label == IOTA or h.label.startswith(ORACLE_PREFIX):
                raise RuleError("rule %s already uses a reserved label" % (r.name or r))
    ok, missing = is_gamma_patient_tss(P, gamma)
    if not ok:
        raise RuleError("no patience rule for %s" % ", ".join("%s.%d" % m for m in missing))


def afo_transform(P: TSS, gamma=None, oracle="divergence", universe: Sequence = (),
                  depth: int = 16) -> AfoResult:
    """Abstraction-free TSS with hat constants for the LTS generated from universe.

    oracle is an OracleSpec, or one of 'divergence', 'class-naming', 'none' to be built on G.
    """
    gamma = frozenset(patience_positions(P) if gamma is None else gamma)
    _check_input(P, gamma)
    G = generate_lts(P, list(universe), depth)
    if G.truncated or G.escapes:
        why = ", ".join(sorted(str(e) for e in G.escapes)) if G.escapes else "depth bound reached"
        raise AfoError("the universe is not closed under transitions (%s)" % why)
    if isinstance(oracle, str):
        if oracle not in ORACLES:
            raise ValueError("unknown oracle kind %r" % oracle)
        oracle = ORACLES[oracle](G) if ORACLES[oracle] else no_oracle()
    taken = set(P.signature)
    hats = {t: _fresh_name("hat%d" % k, taken) for k, t in enumerate(G.terms)}
    sqrt = _fresh_name("sqrt", taken)

    rules = transform_rules(P, gamma)
    for s, a, t in G.transitions:
        rules.append(Rule((), Literal(App(hats[G.terms[s]], ()), a, App(hats[G.terms[t]], ()))))
    for t in G.terms:
        if t in oracle.zeta:
            rules.append(Rule((), Literal(App(hats[t], ()), oracle.zeta[t], App(sqrt, ()))))
    for f, n in P.signature.items():
        xs = tuple(Var("x%d" % k) for k in range(1, n + 1))
        for k in range(1, n + 1):
            if (f, k) not in gamma:
                continue
            for o in oracle.labels:
                rules.append(Rule((Literal(xs[k - 1], o, Var("y")),), Literal(App(f, xs), o, Var("y")),
                                  "inherit_%s_%d" % (f, k)))

    sig = Signature(dict(P.signature.items()))
    for name in list(hats.values()) + [sqrt]:
        sig.add(name, 0)
    actions = set(P.actions) | {IOTA} | set(oracle.labels)
    T = TSS(sig, actions, rules, aleph=P.aleph, lam=P.lam, order=(), infix=P.infix)

    Htrans = list(G.transitions) + [(G.state(t), o, G.n) for t, o in oracle.zeta.items() if t in G]
    H = LTS(G.n + 1, Htrans, ["^" + n for n in G.names] + [sqrt])
    return AfoResult(T, G, H, gamma, oracle, hats, sqrt, P)


def abstraction_free_violations(T: TSS, gamma) -> List[Rule]:
    """Rules concluding tau that are neither patience rules nor premise-free between constants."""
    bad = []
    for r in T.rules:
        if r.label != TAU or is_patience_rule(r, gamma):
            continue
        if not r.premises and isinstance(r.source, App) and not r.source.args \
                and isinstance(r.target, App) and not r.target.args:
            continue
        bad.append(r)
    return bad


def rule_set(T: TSS, exclude_constants: bool = True):
    """Canonical texts of the rules of T, optionally leaving out the premise-free constant rules."""
    out = set()
    for r in T.rules:
        if exclude_constants and not r.premises and isinstance(r.source, App) and not r.source.args:
            continue
        out.add(str(canonical(Rule(r.premises, r.conclusion))))
    return out


# --- decoding -------------------------------------------------------------------

def dec_lts(res: AfoResult, seeds: Sequence, depth: int = 16) -> TermLTS:
    """K: the LTS of the transformed TSS with oracle transitions erased and iota read as tau.

    State k of K is dec of state k of the transformed LTS; the terms are kept for lookup.
    """
    L = afo_lts(res, seeds, depth)
    return decode(L, res.oracle.labels)


def decode(L: TermLTS, oracle_labels) -> TermLTS:
    trans = [(s, TAU if a == IOTA else a, t) for s, a, t in L.transitions if a not in set(oracle_labels)]
    K = TermLTS(L.terms, trans, L.truncated, L.escapes)
    K.names = ["dec(%s)" % n for n in L.names]
    return K


def afo_lts(res: AfoResult, seeds: Sequence, depth: int = 16) -> TermLTS:
    L = generate_lts(res.tss, list(seeds), depth)
    if L.truncated or L.escapes:
        raise AfoError("transformed fragment is not closed under transitions")
    return L


def hat_seeds(res: AfoResult, terms=None, max_tuples: Optional[int] = None, rng=None):
    """Hat constants, the constants of P, and every operator applied to hat constants of the terms."""
    return [u for _, u in hat_pairs(res, terms, max_tuples, rng)]


def hat_pairs(res: AfoResult, terms=None, max_tuples: Optional[int] = None, rng=None):
    """(f(p1..pn), f(^p1..^pn)) for every symbol f and tuple of terms, plus (p, ^p) for hats."""
    terms = list(res.G.terms if terms is None else terms)
    hats = [res.hat(t) for t in terms]
    out = [(t, h) for t, h in zip(terms, hats)]
    for f, n in res.source.signature.items():
        if n == 0:
            out.append((App(f, ()), App(f, ())))
            continue
        tuples = list(itertools.product(range(len(terms)), repeat=n))
        if max_tuples is not None and len(tuples) > max_tuples:
            tuples = (rng or random.Random(0)).sample(tuples, max_tuples)
        for tup in tuples:
            out.append((App(f, tuple(terms[k] for k in tup)), App(f, tuple(hats[k] for k in tup))))
    return out


# --- requirements of the lifting theorem ---------------------------------------------

def _req(k, ok, detail, vacuous=False):
    return {"requirement": k, "ok": bool(ok), "detail": detail, "vacuous": vacuous}


def _pairs_broken(pa: equiv.Partition, pb: equiv.Partition, index_a, index_b, items):
    """Items (x, y) related by pa whose images are not related by pb."""
    out = []
    for (x1, y1), (x2, y2) in itertools.combinations(items, 2):
        if pa.related(index_a(x1), index_a(x2)) and not pb.related(index_b(y1), index_b(y2)):
            out.append((x1, x2))
    return out


def verify_afo_requirements(P: TSS, pair=("wdb", "sb"), universe: Sequence = (), aleph=None, lam=None,
                            oracle: Optional[str] = None, depth: int = 16,
                            max_tuples: Optional[int] = None, seed: int = 0) -> dict:
    """Check the six requirements of the lifting theorem on finite fragments.

    pair is (finer, coarser); the oracle defaults to divergence for the weak kinds and to
    class naming for the divergence-preserving ones.
    """
    sim, approx = pair
    if tuple(pair) not in KIND_PAIRS:
        raise ValueError("unsupported kind pair %r" % (pair,))
    fmt = "rsbb" if approx.startswith("r") else "sbb"
    if oracle is None:
        oracle = "divergence" if sim.endswith("wdb") else "class-naming"
    reqs = []
    if not P.signature.operators() and not list(universe):
        reqs = [_req(k, True, "empty signature", vacuous=True) for k in range(1, 7)]
        return {"pair": list(pair), "format": fmt, "oracle": oracle, "ok": True, "requirements": reqs}

    v = check_format(P, fmt, aleph, lam)
    res = afo_transform(P, None, oracle, universe, depth)
    rng = random.Random(seed)
    pairs = hat_pairs(res, None, max_tuples, rng)

    # 1: complete and standard on the fragment
    try:
        L = afo_lts(res, [u for _, u in pairs], depth)
        reqs.append(_req(1, res.tss.standard, "complete on %d terms" % L.n))
    except IncompleteTSS as e:
        reqs.append(_req(1, False, "undecided literals: %s" % ", ".join(str(x) for x in e.ambiguous[:5])))
        return {"pair": list(pair), "format": fmt, "oracle": res.oracle.kind, "ok": False, "requirements": reqs}

    # 2: format preserved
    af = abstraction_free_violations(res.tss, res.gamma)
    if not v.ok:
        reqs.append(_req(2, not af, "P is not in %s format" % fmt, vacuous=True))
    else:
        w = check_format(res.tss, fmt, v.aleph, v.lam)
        detail = "aleph/Lambda carried over" if w.ok else "; ".join(
            "%s: %s" % (x.condition, x.detail) for x in w.violations[:3])
        if af:
            detail += "; not abstraction-free: %s" % af[0]
        reqs.append(_req(2, w.ok and not af, detail))

    G = res.G
    # 3: sim on G carries over to the hats
    pg, pl = equiv.coarsest(G, sim), equiv.coarsest(L, sim)
    items = [(t, res.hat(t)) for t in G.terms]
    bad = _pairs_broken(pg, pl, G.state, L.state, items)
    reqs.append(_req(3, not bad, "broken for %s" % ", ".join("(%s, %s)" % b for b in bad[:3]) if bad
                     else "%d classes on G" % pg.count()))

    # 4: sim and approx coincide on the fragment
    pa = equiv.coarsest(L, approx)
    diff = [(L.names[s], L.names[t]) for s, t in itertools.combinations(range(L.n), 2)
            if pa.related(s, t) != pl.related(s, t)]
    reqs.append(_req(4, not diff, "differ on %s" % ", ".join("(%s, %s)" % d for d in diff[:3]) if diff
                     else "%d classes" % pl.count()))

    # 5: sim on the fragment carries over through dec
    K = decode(L, res.oracle.labels)
    pk = equiv.coarsest(K, sim)
    ok5 = pl.refines(pk)
    reqs.append(_req(5, ok5, "refines" if ok5 else "dec splits a %s class" % sim))

    # 6: f(p..) strongly bisimilar to dec(f(^p..))
    LP = generate_lts(P, [t for t, _ in pairs], depth)
    U = disjoint_union(LP, K)
    ps = equiv.coarsest(U, "strong")
    miss = [str(t) for t, u in pairs if not ps.related(LP.state(t), LP.n + K.state(u))]
    reqs.append(_req(6, not miss, "not bisimilar: %s" % ", ".join(miss[:3]) if miss
                     else "%d terms" % len(pairs)))
    return {"pair": list(pair), "format": fmt, "oracle": res.oracle.kind,
            "ok": all(r["ok"] for r in reqs), "requirements": reqs}


# --- congruence harness ----------------------------------------------------------

def congruence_harness(P: TSS, kind: str, op: Optional[str] = None, samples: int = 200,
                       seed: int = 0, universe: Sequence = (), pairs=None, depth: int = 16) -> dict:
    """Check f(p..) ~ f(q..) whenever the arguments are pairwise ~.

    Argument pairs are given explicitly, or sampled: each p_i at random, each q_i at random
    from the class of p_i.
    """
    if kind not in equiv.KINDS:
        raise ValueError("unknown equivalence kind %r" % kind)
    base = [App(c, ()) for c in P.signature.constants()] + list(universe)
    G = generate_lts(P, base, depth)
    part = equiv.coarsest(G, kind)
    ops = [(f, n) for f, n in P.signature.items() if n > 0 and (op is None or f == op)]
    if op is not None and not ops:
        raise ValueError("no operator %r with arguments" % op)
    todo = []
    if pairs is not None:
        for f, ps, qs in pairs:
            todo.append((f, tuple(ps), tuple(qs)))
    else:
        rng = random.Random(seed)
        classes = {}
        for s in range(G.n):
            classes.setdefault(part.block(s), []).append(s)
        for k in range(samples):
            f, n = ops[k % len(ops)]
            ps = tuple(rng.randrange(G.n) for _ in range(n))
            qs = tuple(rng.choice(classes[part.block(s)]) for s in ps)
            todo.append((f, tuple(G.terms[s] for s in ps), tuple(G.terms[s] for s in qs)))
    images = [App(f, ps) for f, ps, _ in todo] + [App(f, qs) for f, _, qs in todo]
    L = generate_lts(P, list(base) + [a for _, ps, qs in todo for a in ps + qs] + images, depth)
    pl = equiv.coarsest(L, kind)
    violations, checked, skipped = [], 0, 0
    seen = set()
    for f, ps, qs in todo:
        if not all(pl.related(L.state(a), L.state(b)) for a, b in zip(ps, qs)):
            skipped += 1
            continue
        checked += 1
        l, r = App(f, ps), App(f, qs)
        if not pl.related(L.state(l), L.state(r)) and (l, r) not in seen:
            seen.add((l, r))
            violations.append({"op": f, "left": str(l), "right": str(r),
                               "args": [[str(a), str(b)] for a, b in zip(ps, qs)]})
    return {"kind": kind, "checked": checked, "skipped": skipped, "ok": not violations,
            "violations": violations}
