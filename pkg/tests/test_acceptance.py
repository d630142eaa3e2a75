"""End-to-end acceptance checks, one test per criterion."""

import random
import time

from sosforge import equiv
from sosforge.afo import (DIVERGENCE, KIND_PAIRS, OracleSpec, afo_lts, afo_transform, congruence_harness,
                          hat_seeds, rule_set, verify_afo_requirements)
from sosforge.decompose import (Decomposer, battery, battery_terms, closed_instances,
                                verify_class_preservation, verify_decomposition_theorem)
from sosforge.formats import check_format
from sosforge.modal import class_membership, distinguish, satisfies
from sosforge.proofs import generate_lts
from sosforge.ruloids import RuloidEngine, build_p_plus, check_ruloid_safety, open_terms, to_decent_ntyft
from sosforge.syntax import term_for
from sosforge.tss import universal

SEED = 2026
SUITE_SIZE = 500


def random_suite():
    rng = random.Random(SEED)
    return [equiv.random_lts(rng, max_states=6, labels=("a", "b", "tau")) for _ in range(SUITE_SIZE)]


def test_criterion_1_sequencing(seq, prio, verdict):
    t0 = time.time()
    names = ["p", "q", "r", "0", "p;r", "q;r", "p0", "q0", "p0;r", "q0;r"]
    l = generate_lts(seq, [term_for(seq, s) for s in names])
    s = lambda x: l.state(term_for(seq, x))
    rel = lambda k, x, y: equiv.related(l, k, s(x), s(y))
    checks = {
        "p b q": rel("b", "p", "q"),
        "p not sb q": not rel("sb", "p", "q"),
        "p;r strong p": rel("strong", "p;r", "p"),
        "q;r strong r": rel("strong", "q;r", "r"),
        "p;r not b q;r": not rel("b", "p;r", "q;r"),
        "p0 rb q0": rel("rb", "p0", "q0"),
        "p0;r not rb q0;r": not rel("rb", "p0;r", "q0;r"),
    }
    m = generate_lts(prio, [term_for(prio, x) for x in ("Theta(p0)", "Theta(q0)", "p0", "q0")])
    st = lambda x: m.state(term_for(prio, x))
    checks["p0 rb q0 (priority)"] = equiv.related(m, "rb", st("p0"), st("q0"))
    checks["Theta(p0) not rb Theta(q0)"] = not equiv.related(m, "rb", st("Theta(p0)"), st("Theta(q0)"))
    elapsed = time.time() - t0
    bad = [k for k, v in checks.items() if not v]
    verdict(1, not bad and elapsed < 1.0,
            "%d/%d sequencing facts hold in %.2fs%s" % (len(checks) - len(bad), len(checks), elapsed,
                                                       " (failed: %s)" % bad if bad else ""))


def test_criterion_2_priority_formats(prio, corpus, verdict):
    rsbb = check_format(prio, "rsbb", search=True)
    rbb = check_format(prio, "rbb", search=True)
    no_tau = check_format(corpus("priority_no_tau.tss"), "rsbb", search=True)
    ok = (rsbb.ok and ("Theta", 1) in rsbb.aleph and rsbb.lam == universal(prio.signature)
          and not rbb.ok and "4" in rbb.conditions()
          and not no_tau.ok and "4a" in no_tau.conditions())
    verdict(2, ok, "rsbb %s (aleph %s), rbb cites %s, without a<tau rsbb cites %s"
            % ("pass" if rsbb.ok else "fail", sorted(rsbb.aleph or ()), rbb.conditions(), no_tau.conditions()))


def test_criterion_3_negative_patience(corpus, verdict):
    P = corpus("negpatience.tss")
    p, p1, q = (term_for(P, x) for x in ("p", "p1", "q"))
    fpq, fp1q = term_for(P, "f(p, q)"), term_for(P, "f(p1, q)")
    l = generate_lts(P, [p, p1, q, fpq, fp1q])
    eq_args = equiv.related(l, "sb", l.state(p), l.state(p1))
    eq_imgs = equiv.related(l, "sb", l.state(fpq), l.state(fp1q))
    rep = congruence_harness(P, "sb", pairs=[("f", (p, q), (p1, q))])
    found = [(v["left"], v["right"]) for v in rep["violations"]]
    ok = eq_args and not eq_imgs and found == [("f(p, q)", "f(p1, q)")]
    verdict(3, ok, "p sb p1: %s, f(p,q) sb f(p1,q): %s, harness reports %s" % (eq_args, eq_imgs, found))


def test_criterion_4_oracle_equivalence(verdict):
    t0 = time.time()
    mismatches, chain_fail = [], 0
    for k, l in enumerate(random_suite()):
        for kind in equiv.KINDS:
            if equiv.coarsest(l, kind) != equiv.oracle_coarsest(l, kind):
                mismatches.append((k, kind))
        if not equiv.inclusion_chain_check(l)["ok"]:
            chain_fail += 1
    elapsed = time.time() - t0
    verdict(4, not mismatches and not chain_fail and elapsed < 60,
            "%d LTSs x %d kinds: %d mismatches, %d chain violations, %.1fs"
            % (SUITE_SIZE, len(equiv.KINDS), len(mismatches), chain_fail, elapsed))


def test_criterion_5_modal_characterisation(verdict):
    pairs = (("b", "Ob"), ("rb", "Orb"), ("sb", "Obs"), ("rsb", "Orbs"))
    bad, witnesses = [], 0
    for k, l in enumerate(random_suite()):
        for kind, cls in pairs:
            part = equiv.coarsest(l, kind)
            for s in range(l.n):
                for t in range(s + 1, l.n):
                    phi = distinguish(l, s, t, cls)
                    if phi is None:
                        if not part.related(s, t):
                            bad.append((k, cls, s, t, "missing"))
                        continue
                    witnesses += 1
                    if part.related(s, t) or not class_membership(phi, cls) \
                            or satisfies(l, s, phi) == satisfies(l, t, phi):
                        bad.append((k, cls, s, t, str(phi)))
    verdict(5, not bad, "%d witnesses checked, %d disagreements" % (witnesses, len(bad)))


DECOMP = (("sequencing.tss", ("p", "q", "r", "0")), ("priority.tss", ("0", "p", "q", "s")))


def test_criterion_6_decomposition_theorem(corpus, verdict):
    t0 = time.time()
    counter, checked = [], 0
    for name, uni in DECOMP:
        P = corpus(name)
        U = [term_for(P, x) for x in uni]
        v = check_format(P, "rsbb")
        D = Decomposer(P, v.aleph & v.lam)
        terms = battery_terms(P)
        l = generate_lts(P, U + closed_instances(terms, U))
        for t in terms:
            for phi in battery():
                rep = verify_decomposition_theorem(P, t, phi, U, D, l)
                checked += rep["substitutions"]
                counter.extend(rep["counterexamples"])
    elapsed = time.time() - t0
    verdict(6, not counter and elapsed < 120,
            "%d (term, formula, substitution) cases, %d counterexamples, %.1fs" % (checked, len(counter), elapsed))


def test_criterion_7_class_preservation(corpus, verdict):
    viol, checks = [], 0
    for name, _ in DECOMP:
        P = corpus(name)
        v = check_format(P, "rsbb")
        D = Decomposer(P, v.aleph & v.lam)
        phis = [phi for phi in battery() if class_membership(phi, "Obs") or class_membership(phi, "Orbs")]
        for t in battery_terms(P):
            for phi in phis:
                rep = verify_class_preservation(P, v.aleph, v.lam, t, phi, D)
                checks += rep["checks"]
                viol.extend(rep["violations"])
    verdict(7, not viol and checks > 0, "%d class checks, %d violations" % (checks, len(viol)))


def test_criterion_8_ruloid_safety(corpus, verdict):
    total, viol, incomplete = 0, [], 0
    for name in ("sequencing.tss", "priority.tss", "ccs.tss"):
        P = corpus(name)
        v = check_format(P, "rsbb")
        E = RuloidEngine(build_p_plus(to_decent_ntyft(P)))
        sets = [E.ruloids(t, a, pol) for t in open_terms(P, 2) for a in P.labels for pol in (True, False)]
        incomplete += sum(1 for rs in sets if not rs.complete)
        total += sum(len(rs) for rs in sets)
        viol.extend(check_ruloid_safety(sets, v.aleph, v.lam))
    verdict(8, not viol and not incomplete and total > 0,
            "%d ruloids, %d unsafe, %d incomplete sets" % (total, len(viol), incomplete))


AFO_FIXTURES = (
    ("sequencing.tss", ("0", "p", "q", "r", "p0", "q0", "d", "p;r", "q;r", "d;r")),
    ("priority.tss", ("0", "p", "q", "s", "p0", "q0", "Theta(p)", "Theta(q)", "Theta(s)")),
)


def test_criterion_9_afo_pipeline(corpus, verdict):
    failed, runs, coincide = [], 0, 0
    for name, uni in AFO_FIXTURES:
        P = corpus(name)
        U = [term_for(P, x) for x in uni]
        assert len(U) <= 12
        for pair in KIND_PAIRS:
            rep = verify_afo_requirements(P, pair, U)
            runs += 1
            failed.extend((name, pair, r["requirement"]) for r in rep["requirements"] if not r["ok"])
        # both partitions on the transformed fragment
        for oracle, finer in (("divergence", "wdb"), ("class-naming", "db")):
            res = afo_transform(P, oracle=oracle, universe=U)
            L = afo_lts(res, hat_seeds(res))
            if equiv.coarsest(L, finer) == equiv.coarsest(L, "sb"):
                coincide += 1
            else:
                failed.append((name, oracle, "coincide"))
    g = afo_transform(corpus("g_example.tss"), oracle=OracleSpec("divergence", (DIVERGENCE,)))
    want = rule_set(corpus("g_example_afo.tss"))
    g_ok = rule_set(g.tss) == want and len(want) == 9
    verdict(9, not failed and g_ok and coincide == 4,
            "%d fixture/pair runs, failures %s, %d coincidence checks, g-example %s"
            % (runs, failed or "none", coincide, "matches 9 rules" if g_ok else "differs"))


FORMAT_KINDS = {"bb": ("b",), "rbb": ("rb",), "sbb": ("sb", "wdb", "db"), "rsbb": ("rsb", "rwdb", "rdb")}
EXPECTED_FORMATS = {"sequencing.tss": {"rsbb"}, "priority.tss": {"sbb", "rsbb"}, "ccs.tss": {"rbb", "rsbb"}}


def test_criterion_10_congruence(corpus, verdict):
    clean, checked, problems = 0, 0, []
    for name, expected in EXPECTED_FORMATS.items():
        P = corpus(name)
        fmts = {f for f in FORMAT_KINDS if check_format(P, f).ok}
        if fmts != expected:
            problems.append((name, "formats", sorted(fmts)))
        for f in sorted(fmts):
            for kind in FORMAT_KINDS[f]:
                rep = congruence_harness(P, kind, samples=200, seed=SEED)
                checked += rep["checked"]
                clean += 1
                if rep["violations"]:
                    problems.append((name, kind, rep["violations"][0]))
    neg = congruence_harness(corpus("negpatience.tss"), "sb", samples=200, seed=SEED)
    neg_pairs = {(v["left"], v["right"]) for v in neg["violations"]}
    look = congruence_harness(corpus("lookahead.tss"), "rb", samples=200, seed=SEED)
    look_pairs = {frozenset((v["left"], v["right"])) for v in look["violations"]}
    if not any({l.replace(" ", ""), r.replace(" ", "")} == {"f(p,q)", "f(p1,q)"} for l, r in neg_pairs):
        problems.append(("negpatience", "expected f(p,q)/f(p1,q)", sorted(neg_pairs)))
    if frozenset(("f(u)", "f(v)")) not in look_pairs:
        problems.append(("lookahead", "expected f(u)/f(v)", sorted(map(sorted, look_pairs))))
    verdict(10, not problems,
            "%d in-format runs over %d pairs, 0 violations expected; negpatience %d and lookahead %d violations found%s"
            % (clean, checked, len(neg_pairs), len(look_pairs), "; problems %s" % problems if problems else ""))
