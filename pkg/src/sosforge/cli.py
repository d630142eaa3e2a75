"""Command-line entry point: sosforge <subcommand> ..."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import afo, decompose, equiv, formats, modal, ruloids
from .formula import has_delta
from .lts import LTSError
from .proofs import IncompleteTSS, generate_lts
from .syntax import SyntaxErr, emit_formula, emit_lts, emit_rule, emit_tss, load, parse_formula, parse_term
from .terms import TermError
from .tss import TSS, Rule, RuleError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _color() -> bool:
    return os.environ.get("SOSFORGE_COLOR", "").lower() in ("1", "true", "yes", "always", "on")


def _verdict(ok: bool, text: str = "") -> str:
    word = "PASS" if ok else "FAIL"
    if _color():
        word = ("\033[32m%s\033[0m" if ok else "\033[31m%s\033[0m") % word
    return word + (" " + text if text else "")


def _out(s=""):
    sys.stdout.write(s if s.endswith("\n") else s + "\n")


# --- loading helpers ------------------------------------------------------------

def _load(path, kind=None):
    obj = load(path)
    if kind is TSS and not isinstance(obj, TSS):
        raise UsageError("%s is not a .tss file" % path)
    return obj


def _term(P: TSS, text: str):
    try:
        return parse_term(text, P.signature, P.infix)
    except SyntaxErr as e:
        raise UsageError("cannot parse term %r: %s" % (text, e)) from None


def _system(path, states, depth):
    """(LTS, state indices) from an .aut file or from a .tss file and closed terms."""
    obj = _load(path)
    if isinstance(obj, TSS):
        terms = [_term(obj, s) for s in states]
        l = generate_lts(obj, terms, depth)
        return l, [l.state(t) for t in terms]
    if hasattr(obj, "succ"):
        # digits are indices; anything else is looked up among the state names
        return obj, [obj.index(s) if not s.isdigit() else _index(obj, int(s)) for s in states]
    raise UsageError("%s holds a formula, expected a system" % path)


def _index(l, k):
    if not 0 <= k < l.n:
        raise UsageError("state %d out of range" % k)
    return k


def _pred(text, P: TSS):
    if text is None:
        return None
    out = set()
    for item in filter(None, (x.strip() for x in text.split(","))):
        f, _, i = item.rpartition(".")
        if not f or not i.isdigit():
            raise UsageError("bad position %r, expected SYMBOL.INDEX" % item)
        if f not in P.signature or not 1 <= int(i) <= P.signature.arity(f):
            raise UsageError("no argument %s" % item)
        out.add((f, int(i)))
    return frozenset(out)


def _formula(args):
    if args.formula_file:
        phi = _load(args.formula_file)
        if isinstance(phi, (TSS,)) or hasattr(phi, "succ"):
            raise UsageError("%s is not a formula file" % args.formula_file)
        return phi
    if args.formula is None:
        raise UsageError("give a formula or --formula-file")
    return parse_formula(args.formula)


# --- subcommands -------------------------------------------------------------------

def cmd_parse(args):
    obj = _load(args.file)
    if isinstance(obj, TSS):
        _out(emit_tss(obj))
    elif hasattr(obj, "succ"):
        _out(emit_lts(obj))
    else:
        _out(emit_formula(obj))
    return EXIT_OK


def cmd_check_format(args):
    P = _load(args.file, TSS)
    aleph, lam = _pred(args.aleph, P), _pred(args.lam, P)
    v = formats.check_format(P, args.format, aleph, lam, search=args.search, cap=args.cap)
    if args.json:
        _out(v.to_json())
    else:
        d = v.as_dict()
        _out(_verdict(v.ok, "%s format" % args.format) if not v.aborted else "ABORTED search")
        if d["aleph"] is not None:
            _out("aleph:  {%s}" % ", ".join(d["aleph"]))
            _out("Lambda: {%s}" % ", ".join(d["lambda"]))
        for x in v.violations:
            _out("  condition %s in %s: %s" % (x.condition, x.rule, x.detail))
    return EXIT_OK if v.ok else EXIT_NEGATIVE


def cmd_lts(args):
    P = _load(args.file, TSS)
    terms = [_term(P, s) for s in args.terms] or [parse_term(c, P.signature) for c in P.signature.constants()]
    l = generate_lts(P, terms, args.depth)
    text = emit_lts(l)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        _out(text)
    if l.truncated:
        sys.stderr.write("warning: depth bound reached, the LTS is a fragment\n")
    return EXIT_OK


def cmd_equiv(args):
    l, idx = _system(args.file, args.states, args.depth)
    part = equiv.coarsest(l, args.rel)
    if args.cross_check:
        if equiv.oracle_coarsest(l, args.rel, max_states=args.cross_check) != part:
            sys.stderr.write("partition refinement and exhaustive search disagree\n")
            return EXIT_INTERNAL
    if args.partition or len(idx) < 2:
        _out(part.as_text(l))
        return EXIT_OK
    ok = all(part.related(idx[0], s) for s in idx[1:])
    _out(_verdict(ok, "%s related" % args.rel if ok else "%s not related" % args.rel))
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_check(args):
    l, idx = _system(args.file, [args.state], args.depth)
    phi = _formula(args)
    ok = modal.satisfies(l, idx[0], phi)
    _out(_verdict(ok, "%s %s %s" % (args.state, "satisfies" if ok else "does not satisfy", emit_formula(phi))))
    if args.classes:
        for c in modal.CLASSES:
            _out("  %-5s %s" % (c, "yes" if modal.class_membership(phi, c) else "no"))
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_distinguish(args):
    l, (s1, s2) = _system(args.file, [args.s1, args.s2], args.depth)
    phi = modal.distinguish(l, s1, s2, args.cls)
    if phi is None:
        _out("equivalent: no %s formula tells them apart" % args.cls)
        return EXIT_NEGATIVE
    if modal.satisfies(l, s1, phi) == modal.satisfies(l, s2, phi) or not modal.class_membership(phi, args.cls):
        sys.stderr.write("constructed formula fails its own check\n")
        return EXIT_INTERNAL
    _out(emit_formula(phi))
    holder = args.s1 if modal.satisfies(l, s1, phi) else args.s2
    _out("# satisfied by %s only" % holder)
    return EXIT_OK


def cmd_ruloids(args):
    P = _load(args.file, TSS)
    Pp = ruloids.build_p_plus(ruloids.to_decent_ntyft(P))
    eng = ruloids.RuloidEngine(Pp, args.depth_ruloid)
    labels = args.label or list(P.labels)
    t = _term(P, args.term)
    sets = [eng.ruloids(t, a, not args.negative) for a in labels]
    for rs in sets:
        _out("# %s %s %s%s" % (t, rs.label, "positive" if rs.positive else "negative",
                               "" if rs.complete else " (depth bound reached)"))
        for r in rs.rules:
            _out(emit_rule(Rule(r.premises, r.conclusion)))
    if args.safety:
        v = formats.check_format(P, "rsbb")
        if not v.ok:
            _out("no rsbb witness predicates; safety not checked")
            return EXIT_NEGATIVE
        viol = ruloids.check_ruloid_safety(sets, v.aleph, v.lam)
        _out(_verdict(not viol, "ruloid safety"))
        for x in viol:
            _out("  condition %s in %s: %s" % (x.condition, x.rule, x.detail))
        return EXIT_OK if not viol else EXIT_NEGATIVE
    return EXIT_OK if all(rs.complete for rs in sets) else EXIT_NEGATIVE


def cmd_decompose(args):
    P = _load(args.file, TSS)
    phi = _formula(args)
    if has_delta(phi):
        raise UsageError("formulas with the divergence modality cannot be decomposed")
    gamma = _pred(args.gamma, P)
    D = decompose.Decomposer(P, gamma, depth=args.depth_ruloid, cap=args.cap, guard=args.guard)
    t = _term(P, args.term)
    maps = sorted(D.decompose(t, phi), key=str)
    _out("# %d mapping(s) for %s and %s" % (len(maps), t, emit_formula(phi)))
    for k, m in enumerate(maps):
        _out("[%d]" % k)
        for x, f in m.items:
            _out("  %s := %s" % (x, emit_formula(f)))
    return EXIT_OK


def cmd_afo(args):
    P = _load(args.file, TSS)
    res = afo.afo_transform(P, _pred(args.gamma, P), args.oracle, [_term(P, s) for s in args.universe],
                            args.depth)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.file).stem
    names = "".join("# %s = %s\n" % (name, t) for t, name in res.hats.items())
    (out / ("%s_afo.tss" % stem)).write_text(names + emit_tss(res.tss), encoding="utf-8")
    (out / ("%s_G.aut" % stem)).write_text(emit_lts(res.G), encoding="utf-8")
    (out / ("%s_H.aut" % stem)).write_text(emit_lts(res.H), encoding="utf-8")
    _out("wrote %s_afo.tss (%d rules), %s_G.aut, %s_H.aut to %s"
         % (stem, len(res.tss.rules), stem, stem, out))
    return EXIT_OK


def cmd_verify_afo(args):
    P = _load(args.file, TSS)
    pairs = afo.KIND_PAIRS if args.pair == "all" else [tuple(args.pair.split(","))]
    ok = True
    reports = []
    for pair in pairs:
        rep = afo.verify_afo_requirements(P, pair, [_term(P, s) for s in args.universe],
                                          _pred(args.aleph, P), _pred(args.lam, P), args.oracle,
                                          args.depth, args.max_tuples, args.seed)
        reports.append(rep)
        ok &= rep["ok"]
    if args.json:
        _out(json.dumps(reports, indent=2, sort_keys=True))
    else:
        for rep in reports:
            _out("%s (%s, %s) oracle=%s" % (_verdict(rep["ok"]), rep["pair"][0], rep["pair"][1], rep["oracle"]))
            for r in rep["requirements"]:
                tag = "vacuous" if r["vacuous"] else ("ok" if r["ok"] else "FAILED")
                _out("  %d %-7s %s" % (r["requirement"], tag, r["detail"]))
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_congruence(args):
    P = _load(args.file, TSS)
    pairs = None
    if args.pair:
        left, right = _term(P, args.pair[0]), _term(P, args.pair[1])
        if getattr(left, "symbol", None) != getattr(right, "symbol", None) or not left.args:
            raise UsageError("--pair needs two applications of the same operator")
        pairs = [(left.symbol, left.args, right.args)]
    rep = afo.congruence_harness(P, args.rel, args.op, args.samples, args.seed,
                                 [_term(P, s) for s in args.universe], pairs, args.depth)
    if args.json:
        _out(json.dumps(rep, indent=2, sort_keys=True))
    else:
        _out(_verdict(rep["ok"], "%s congruence on %d pair(s), %d skipped"
                      % (args.rel, rep["checked"], rep["skipped"])))
        for v in rep["violations"]:
            _out("  %s and %s are not %s related" % (v["left"], v["right"], args.rel))
    return EXIT_OK if rep["ok"] else EXIT_NEGATIVE


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized step")
    common.add_argument("--depth", type=int, default=16, help="term generation depth bound")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sosforge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    p.subcommands = sub.choices

    s = sub.add_parser("parse", parents=[common], help="parse a .tss/.aut/.hml file and print it canonically")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("check-format", parents=[common], help="congruence format membership")
    s.add_argument("file")
    s.add_argument("--format", choices=formats.FORMATS, default="rsbb")
    s.add_argument("--search", action="store_true", help="search for witness predicates")
    s.add_argument("--aleph", help="comma separated SYMBOL.INDEX list")
    s.add_argument("--lambda", dest="lam", help="comma separated SYMBOL.INDEX list")
    s.add_argument("--cap", type=int, default=formats.DEFAULT_CAP)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_check_format)

    s = sub.add_parser("lts", parents=[common], help="generate the LTS of closed terms as .aut")
    s.add_argument("file")
    s.add_argument("terms", nargs="*", help="closed terms (default: every constant)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_lts)

    s = sub.add_parser("equiv", parents=[common], help="equivalence of states or the whole partition")
    s.add_argument("file", help=".aut file (states by index or name), or .tss file with closed terms as states")
    s.add_argument("states", nargs="*")
    s.add_argument("--rel", choices=equiv.KINDS, default="b")
    s.add_argument("--partition", action="store_true")
    s.add_argument("--cross-check", type=int, nargs="?", const=6, default=0, metavar="MAX_STATES",
                   help="compare with exhaustive partition search")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("check", parents=[common], help="model check a formula in a state")
    s.add_argument("file")
    s.add_argument("state")
    s.add_argument("formula", nargs="?")
    s.add_argument("--formula-file")
    s.add_argument("--classes", action="store_true", help="also report class membership")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("distinguish", parents=[common], help="distinguishing formula for two states")
    s.add_argument("file")
    s.add_argument("s1")
    s.add_argument("s2")
    s.add_argument("--class", dest="cls", choices=modal.CLASSES, default="Ob")
    s.set_defaults(func=cmd_distinguish)

    s = sub.add_parser("ruloids", parents=[common], help="ruloids of an open term")
    s.add_argument("file")
    s.add_argument("--term", required=True)
    s.add_argument("--label", action="append", help="repeatable; default every label")
    s.add_argument("--negative", action="store_true")
    s.add_argument("--depth-ruloid", type=int, default=ruloids.DEFAULT_DEPTH)
    s.add_argument("--safety", action="store_true", help="check safety with rsbb witness predicates")
    s.set_defaults(func=cmd_ruloids)

    s = sub.add_parser("decompose", parents=[common], help="decompose a formula for an open term")
    s.add_argument("file")
    s.add_argument("--term", required=True)
    s.add_argument("formula", nargs="?")
    s.add_argument("--formula-file")
    s.add_argument("--gamma", help="comma separated SYMBOL.INDEX list (default: patience positions)")
    s.add_argument("--cap", type=int, default=decompose.DEFAULT_CAP)
    s.add_argument("--guard", type=int, default=decompose.DEFAULT_GUARD)
    s.add_argument("--depth-ruloid", type=int, default=ruloids.DEFAULT_DEPTH)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("afo", parents=[common], help="oracle transformation; writes .tss and G/H .aut files")
    s.add_argument("file")
    s.add_argument("universe", nargs="*", help="closed terms whose LTS is embedded")
    s.add_argument("--oracle", choices=sorted(afo.ORACLES), default="divergence")
    s.add_argument("--gamma")
    s.add_argument("-o", "--output", default=".")
    s.set_defaults(func=cmd_afo)

    s = sub.add_parser("verify-afo", parents=[common], help="check the lifting requirements on a fragment")
    s.add_argument("file")
    s.add_argument("universe", nargs="*")
    s.add_argument("--pair", default="all", help="FINER,COARSER or 'all'")
    s.add_argument("--oracle", choices=sorted(afo.ORACLES))
    s.add_argument("--aleph")
    s.add_argument("--lambda", dest="lam")
    s.add_argument("--max-tuples", type=int)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify_afo)

    s = sub.add_parser("congruence", parents=[common], help="sample argument pairs and test congruence")
    s.add_argument("file")
    s.add_argument("universe", nargs="*", help="extra closed terms to draw arguments from")
    s.add_argument("--rel", choices=equiv.KINDS, default="sb")
    s.add_argument("--op")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--pair", nargs=2, metavar=("LEFT", "RIGHT"))
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_congruence)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] in parser.subcommands:
            # options may come between positionals, e.g. `equiv f.aut --rel b 0 1`
            sub = parser.subcommands[argv[0]]
            sub.prog = "sosforge " + argv[0]
            args = sub.parse_intermixed_args(argv[1:])
        else:
            args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, SyntaxErr, TermError, RuleError, LTSError, OSError, ValueError,
            afo.AfoError, decompose.DecompositionError) as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_USAGE
    except IncompleteTSS as e:
        sys.stderr.write("error: the TSS is not complete on this fragment: %s\n"
                         % ", ".join(str(x) for x in e.ambiguous[:5]))
        return EXIT_NEGATIVE
    except (modal.DistinguishError, AssertionError) as e:
        sys.stderr.write("internal consistency failure: %s\n" % e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
