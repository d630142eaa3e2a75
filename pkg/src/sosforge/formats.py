"""Congruence format checks: ready simulation and the (rooted) (stability-respecting)
branching bisimulation formats."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import List, Optional

from .terms import variables
from .tss import (TAU, TSS, Rule, RuleError, classify_rule, is_gamma_patient_rule,
                  is_gamma_patient_tss, liquid_occurrences, lookahead_vars, free_vars,
                  patience_positions, rule_terms, universal)

FORMATS = ("bb", "rbb", "sbb", "rsbb")
DEFAULT_CAP = 4096


@dataclass
class Violation:
    rule: str
    condition: str
    detail: str

    def as_dict(self):
        return {"rule": self.rule, "condition": self.condition, "detail": self.detail}


@dataclass
class Verdict:
    ok: bool
    format: str
    aleph: Optional[frozenset] = None
    lam: Optional[frozenset] = None
    violations: List[Violation] = field(default_factory=list)
    aborted: bool = False
    searched: int = 0

    def conditions(self):
        return sorted({v.condition for v in self.violations})

    def as_dict(self):
        pred = (lambda p: None if p is None else ["%s.%d" % fi for fi in sorted(p)])
        return {
            "format": self.format,
            "verdict": "aborted" if self.aborted else ("pass" if self.ok else "fail"),
            "aleph": pred(self.aleph),
            "lambda": pred(self.lam),
            "candidates_tried": self.searched,
            "violations": [v.as_dict() for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _name(r: Rule) -> str:
    return r.name or str(r)


# --- ready simulation ------------------------------------------------------------

def check_ready_simulation(P: TSS) -> Verdict:
    out = []
    for r in P.rules:
        flags = classify_rule(r)
        if "ntyft" not in flags and "ntyxt" not in flags:
            out.append(Violation(_name(r), "shape", "neither ntyft nor ntyxt"))
        look = lookahead_vars(r)
        if look:
            y = sorted(look)[0]
            pair = [str(h) for h in r.positives() if y in variables(h.target)]
            pair += [str(h) for h in r.premises if y in variables(h.source)]
            out.append(Violation(_name(r), "lookahead", "variable %s links %s" % (y, " and ".join(pair))))
    return Verdict(not out, "ready-simulation", violations=out)


# --- per-rule safety ----------------------------------------------------------------

def _liq(pred, x, t):
    return liquid_occurrences(pred, x, t)


def _only_liquid_in(pred, x, terms):
    return all(not _liq(pred, x, t)[1] for t in terms)


def _only_frozen_in(pred, x, terms):
    return all(not _liq(pred, x, t)[0] for t in terms)


def _premise_terms(r):
    for h in r.premises:
        yield h.source
        if h.positive:
            yield h.target


def _common(r: Rule, aleph, lam, viol):
    """Conditions 2 and 3, shared by standard and negative-conclusion rules."""
    t = r.source
    all_terms = [u for _, u in rule_terms(r)]
    for x in sorted(variables(t)):
        liq, fro = _liq(lam, x, t)
        if liq and not fro and not _only_liquid_in(lam, x, all_terms):
            viol.append(Violation(_name(r), "2", "%s is only Lambda-liquid in the source but not in the rule" % x))
        liq, fro = _liq(aleph, x, t)
        if fro and not liq and not _only_frozen_in(aleph, x, _premise_terms(r)):
            viol.append(Violation(_name(r), "3", "%s is only aleph-frozen in the source but aleph-liquid in a premise" % x))


def _cond1(r, lam, viol):
    for h in r.positives():
        y = h.target.name
        if _liq(lam, y, r.target)[1]:
            viol.append(Violation(_name(r), "1", "%s occurs Lambda-frozen in the target" % y))


def _aleph_liquid_premises(aleph, x, r):
    """(premise, count) for premises whose left-hand side has aleph-liquid occurrences of x."""
    out = []
    for h in r.premises:
        n = len(_liq(aleph, x, h.source)[0])
        if n:
            out.append((h, n))
    return out


def _main_vars(r, aleph, lam):
    t = r.source
    for x in sorted(variables(t)):
        liq, _ = _liq(aleph, x, t)
        if len(liq) == 1 and liq[0] in _liq(lam, x, t)[0]:
            yield x


def _require_ntytt(r):
    if "ntytt" not in classify_rule(r):
        raise RuleError("rule %s is not ntytt" % _name(r))


def check_rsbb_safe(r: Rule, aleph, lam) -> List[Violation]:
    _require_ntytt(r)
    viol: List[Violation] = []
    _common(r, aleph, lam, viol)
    if not r.standard:
        return viol
    _cond1(r, lam, viol)
    gamma = aleph & lam
    for x in _main_vars(r, aleph, lam):
        occ = _aleph_liquid_premises(aleph, x, r)
        in_neg = any(not h.positive for h, _ in occ)
        pos_count = sum(n for h, n in occ if h.positive)
        if in_neg or pos_count > 1:
            if not any(not h.positive and h.label == TAU for h, _ in occ):
                viol.append(Violation(_name(r), "4a",
                                      "%s has several aleph-liquid premise occurrences but no premise v -tau-/> with %s aleph-liquid in v" % (x, x)))
        if any(h.positive and h.label == TAU for h, _ in occ) and not is_gamma_patient_rule(r, gamma):
            viol.append(Violation(_name(r), "4b", "%s is aleph-liquid in a tau-premise but the rule is not patient" % x))
    return viol


def check_rbb_safe(r: Rule, aleph, lam) -> List[Violation]:
    _require_ntytt(r)
    if not r.standard:
        raise RuleError("rooted branching bisimulation safety is defined for standard rules only")
    viol: List[Violation] = []
    _common(r, aleph, lam, viol)
    _cond1(r, lam, viol)
    gamma = aleph & lam
    for x in _main_vars(r, aleph, lam):
        occ = _aleph_liquid_premises(aleph, x, r)
        total = sum(n for _, n in occ)
        if total > 1 or any(not h.positive for h, _ in occ):
            viol.append(Violation(_name(r), "4", "%s needs at most one aleph-liquid premise occurrence, in a positive premise" % x))
        elif occ and occ[0][0].label == TAU and not is_gamma_patient_rule(r, gamma):
            viol.append(Violation(_name(r), "4", "%s is aleph-liquid in a tau-premise but the rule is not patient" % x))
    return viol


# --- whole-TSS format check -------------------------------------------------------

def _evaluate(P: TSS, fmt, aleph, lam) -> List[Violation]:
    viol: List[Violation] = []
    if fmt in ("bb", "sbb") and lam != universal(P.signature):
        missing = sorted(universal(P.signature) - lam)
        viol.append(Violation("*", "universal", "Lambda misses %s" % ", ".join("%s.%d" % m for m in missing)))
    ok, missing = is_gamma_patient_tss(P, aleph & lam)
    if not ok:
        viol.append(Violation("*", "patience", "no patience rule for %s" % ", ".join("%s.%d" % m for m in missing)))
    check = check_rbb_safe if fmt in ("bb", "rbb") else check_rsbb_safe
    for r in P.rules:
        viol.extend(check(r, aleph, lam))
    return viol


def _candidates(P: TSS, fmt):
    """Predicate pairs in search order: Gamma is the set of positions with patience rules;
    every other position is left out, aleph-only or Lambda-only."""
    gamma = patience_positions(P)
    free = [fi for fi in sorted(universal(P.signature)) if fi not in gamma]
    opts = ("lam",) if fmt in ("bb", "sbb") else ("none", "aleph", "lam")
    combos = itertools.product(range(len(opts)), repeat=len(free))
    total = len(opts) ** len(free)

    def gen():
        for combo in sorted(combos, key=lambda c: (sum(1 for k in c if k), c)):
            aleph, lam = set(gamma), set(gamma)
            for fi, k in zip(free, combo):
                if opts[k] == "aleph":
                    aleph.add(fi)
                elif opts[k] == "lam":
                    lam.add(fi)
            yield frozenset(aleph), frozenset(lam)
    return total, gen


def check_format(P: TSS, fmt: str, aleph=None, lam=None, search: Optional[bool] = None,
                 cap: int = DEFAULT_CAP) -> Verdict:
    """Membership of P in fmt, with witness predicates.

    Predicates come from the arguments, else from P's declarations, else from a search.
    """
    if fmt not in FORMATS:
        raise ValueError("unknown format %r" % fmt)
    if not P.standard:
        raise RuleError("format check needs a standard TSS")
    rs = check_ready_simulation(P)
    if not rs.ok:
        return Verdict(False, fmt, aleph, lam, rs.violations)
    if aleph is None and lam is None and not search and P.aleph is not None and P.lam is not None:
        aleph, lam = P.aleph, P.lam
    if aleph is not None or lam is not None:
        aleph = frozenset(aleph or ())
        lam = frozenset(lam or ())
        viol = _evaluate(P, fmt, aleph, lam)
        return Verdict(not viol, fmt, aleph, lam, viol, searched=1)
    total, gen = _candidates(P, fmt)
    if total > cap:
        return Verdict(False, fmt, violations=[Violation("*", "search", "%d candidates exceed cap %d" % (total, cap))],
                       aborted=True)
    best = None
    tried = 0
    for a, l in gen():
        tried += 1
        viol = _evaluate(P, fmt, a, l)
        if not viol:
            return Verdict(True, fmt, a, l, [], searched=tried)
        if best is None or len(viol) < len(best[2]):
            best = (a, l, viol)
    a, l, viol = best
    return Verdict(False, fmt, a, l, viol, searched=tried)


def decent_report(P: TSS):
    """Rules with lookahead or free variables."""
    return [(r, sorted(lookahead_vars(r)), sorted(free_vars(r))) for r in P.rules
            if lookahead_vars(r) or free_vars(r)]
