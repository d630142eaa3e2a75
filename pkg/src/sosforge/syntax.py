"""Readers and writers for .tss specifications, .aut transition systems and .hml formulas."""

from __future__ import annotations

import itertools
import re
from typing import Dict, List

from .formula import Conj, DeltaMod, Diam, EpsDiam, Formula, Neg, TauHatDiam
from .lts import LTS, LTSError
from .terms import App, Signature, TermError, Var, is_fresh_name
from .tss import IOTA, ORACLE_PREFIX, TAU, TSS, Literal, Rule, RuleError, canonical


class SyntaxErr(Exception):
    def __init__(self, msg, line=0, col=0):
        self.msg, self.line, self.col = msg, line, col
        super().__init__("%d:%d: %s" % (line, col, msg) if line else msg)


IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_RESERVED_OPS = {"-", ">", "<", "|-", "->", "-/>", "(", ")", ",", ":", "{", "}", "#", "@", "%"}


# --- tokenizer -------------------------------------------------------------

class Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return "Tok(%s,%r)" % (self.kind, self.text)


def _tokenize(text, line, col0, infix=()):
    ops = sorted(infix, key=len, reverse=True)
    fixed = ["|-", "-/>", "->"] + ops + ["-", "(", ")", ",", ":", "{", "}", "<", ">", "~", "/\\"]
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        m = re.match(IDENT, text[i:])
        if m:
            toks.append(Tok("id", m.group(), line, col0 + i))
            i += m.end()
            continue
        m = re.match(r"[0-9]+", text[i:])
        if m:
            toks.append(Tok("num", m.group(), line, col0 + i))
            i += m.end()
            continue
        m = re.match(ORACLE_PREFIX + r"[A-Za-z0-9_']+", text[i:])
        if m:
            toks.append(Tok("oracle", m.group(), line, col0 + i))
            i += m.end()
            continue
        for op in fixed:
            if text.startswith(op, i):
                toks.append(Tok("op", op, line, col0 + i))
                i += len(op)
                break
        else:
            raise SyntaxErr("unexpected character %r" % c, line, col0 + i)
    toks.append(Tok("eof", "", line, col0 + len(text)))
    return toks


class _Stream:
    def __init__(self, toks):
        self.toks, self.i = toks, 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text, kind=None) -> bool:
        t = self.cur
        return t.text == text and (kind is None or t.kind == kind)

    def expect(self, text) -> Tok:
        if self.cur.text != text or self.cur.kind == "eof":
            self.error("expected %r" % text)
        return self.next()

    def error(self, msg):
        t = self.cur
        found = "end of line" if t.kind == "eof" else repr(t.text)
        raise SyntaxErr("%s, found %s" % (msg, found), t.line, t.col)


# --- logical lines ---------------------------------------------------------

def _logical_lines(text):
    """Yield (line number, column offset, content) with comments stripped and continuations joined."""
    buf, start = None, 0
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        cont = line.endswith("\\")
        if cont:
            line = line[:-1]
        if buf is None:
            buf, start = line, no
        else:
            buf += " " + line
        if not cont:
            if buf.strip():
                yield start, 1, buf
            buf = None
    if buf and buf.strip():
        yield start, 1, buf


# --- terms -----------------------------------------------------------------

def _parse_term(st: _Stream, sig: Signature, infix):
    t = _parse_primary(st, sig, infix)
    while st.cur.kind == "op" and st.cur.text in infix:
        op = st.next()
        rhs = _parse_primary(st, sig, infix)
        t = App(op.text, (t, rhs))
    return t


def _parse_primary(st: _Stream, sig, infix):
    tok = st.cur
    if st.at("(", "op"):
        st.next()
        t = _parse_term(st, sig, infix)
        st.expect(")")
        return t
    if tok.kind not in ("id", "num"):
        st.error("expected a term")
    st.next()
    name = tok.text
    if st.at("(", "op"):
        st.next()
        args = []
        if not st.at(")"):
            args.append(_parse_term(st, sig, infix))
            while st.at(","):
                st.next()
                args.append(_parse_term(st, sig, infix))
        st.expect(")")
        if name not in sig:
            raise SyntaxErr("undeclared symbol %r" % name, tok.line, tok.col)
        if sig.arity(name) != len(args):
            raise SyntaxErr("arity mismatch: %s expects %d arguments, got %d"
                            % (name, sig.arity(name), len(args)), tok.line, tok.col)
        return App(name, tuple(args))
    if name in sig:
        if sig.arity(name) != 0:
            raise SyntaxErr("arity mismatch: %s expects %d arguments, got 0"
                            % (name, sig.arity(name)), tok.line, tok.col)
        return App(name, ())
    if tok.kind == "num":
        raise SyntaxErr("undeclared symbol %r" % name, tok.line, tok.col)
    return Var(name)


def parse_term(text: str, signature: Signature, infix=()) -> object:
    st = _Stream(_tokenize(text, 1, 1, infix))
    t = _parse_term(st, signature, set(infix))
    if st.cur.kind != "eof":
        st.error("trailing input")
    return t


def term_for(P: TSS, text: str):
    return parse_term(text, P.signature, P.infix)


# --- .tss ------------------------------------------------------------------

def parse_tss(text: str) -> TSS:
    sig = Signature()
    actions: List[str] = []
    order_pairs = []
    infix = set()
    aleph, lam = set(), set()
    aleph_decl = lam_decl = False
    rule_lines = []
    for line, col, content in _logical_lines(text):
        head = content.split(None, 1)
        word = head[0] if head else ""
        rest = head[1] if len(head) > 1 else ""
        roff = col + content.index(rest) if rest else col + len(content)
        if word == "actions":
            for tok in _tokenize(rest, line, roff):
                if tok.kind == "eof" or tok.text == ",":
                    continue
                if tok.kind not in ("id", "oracle"):
                    raise SyntaxErr("expected an action name", tok.line, tok.col)
                if tok.text == TAU:
                    raise SyntaxErr("tau is implicit and may not be declared", tok.line, tok.col)
                actions.append(tok.text)
        elif word == "order":
            st = _Stream(_tokenize(rest, line, roff))
            while st.cur.kind != "eof":
                lo = st.next()
                st.expect("<")
                hi = st.next()
                for t in (lo, hi):
                    if t.kind not in ("id", "oracle"):
                        raise SyntaxErr("expected an action name", t.line, t.col)
                order_pairs.append((lo.text, hi.text, lo))
                if st.at(","):
                    st.next()
                elif st.cur.kind != "eof":
                    st.error("expected ','")
        elif word == "sig":
            m = re.match(r"\s*(\S+?)/([0-9]+)(.*)$", rest)
            if not m:
                raise SyntaxErr("expected NAME/ARITY", line, roff)
            name, n, tail = m.group(1), int(m.group(2)), m.group(3)
            if re.fullmatch(IDENT + r"|[0-9]+", name) is None:
                if n != 2 or any(ch.isalnum() for ch in name) or name in _RESERVED_OPS \
                        or any(ch in "-<>(),:{}#@%" for ch in name):
                    raise SyntaxErr("invalid symbol name %r" % name, line, roff)
            try:
                sig.add(name, n)
            except TermError as e:
                raise SyntaxErr(str(e), line, roff) from None
            for m2 in re.finditer(r"(infix|aleph|lambda)(?:\(([^)]*)\))?", tail):
                kind, body = m2.group(1), m2.group(2)
                if kind == "infix":
                    if n != 2:
                        raise SyntaxErr("infix symbols must be binary", line, roff)
                    infix.add(name)
                    continue
                idx = [int(x) for x in re.findall(r"[0-9]+", body or "")]
                for i in idx:
                    if not 1 <= i <= n:
                        raise SyntaxErr("argument index %d out of range for %s" % (i, name), line, roff)
                if kind == "aleph":
                    aleph_decl = True
                    aleph |= {(name, i) for i in idx}
                else:
                    lam_decl = True
                    lam |= {(name, i) for i in idx}
            leftover = re.sub(r"(infix|aleph|lambda)(\([^)]*\))?", "", tail).strip()
            if leftover:
                raise SyntaxErr("unexpected %r in signature declaration" % leftover, line, roff)
        else:
            rule_lines.append((line, col, content))
    labels = set(actions) | {TAU}
    order = _close_order(order_pairs, labels)
    rules = []
    for line, col, content in rule_lines:
        rules.extend(_parse_rule_line(content, line, col, sig, infix, actions, order))
    try:
        return TSS(sig, actions, rules, aleph if aleph_decl else None,
                   lam if lam_decl else None, order, infix)
    except (RuleError, TermError) as e:
        raise SyntaxErr(str(e)) from None


def _close_order(pairs, labels):
    rel = set()
    for lo, hi, tok in pairs:
        for a in (lo, hi):
            if a not in labels:
                raise SyntaxErr("undeclared action %r in order" % a, tok.line, tok.col)
        rel.add((lo, hi))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    for a, b in rel:
        if a == b:
            tok = pairs[0][2]
            raise SyntaxErr("ill-formed order: %s < %s after transitive closure" % (a, a),
                            tok.line, tok.col)
    return frozenset(rel)


def _label_set(st, actions):
    tok = st.cur
    if tok.text == "A":
        st.next()
        return list(actions)
    if tok.text == "A_tau":
        st.next()
        return list(actions) + [TAU]
    if st.at("{"):
        st.next()
        out = []
        while not st.at("}"):
            t = st.next()
            if t.kind not in ("id", "oracle"):
                raise SyntaxErr("expected an action name", t.line, t.col)
            out.append(t.text)
            if st.at(","):
                st.next()
            elif not st.at("}"):
                st.error("expected ',' or '}'")
        st.next()
        return out
    st.error("expected A, A_tau or {...}")


def _parse_rule_line(content, line, col, sig, infix, actions, order):
    st = _Stream(_tokenize(content, line, col, infix))
    name = ""
    metas = []
    if st.at("rule", "id"):
        st.next()
        if st.cur.kind == "id" and st.cur.text != "for":
            name = st.next().text
        if st.at("for", "id"):
            st.next()
            while True:
                m = st.next()
                if m.kind != "id":
                    raise SyntaxErr("expected a metavariable", m.line, m.col)
                st.expect("in")
                metas.append((m.text, _label_set(st, actions)))
                if not st.at(","):
                    break
                st.next()
        st.expect(":")
    premises = []
    while not st.at("|-"):
        lit = _parse_literal(st, sig, infix)
        family = None
        if st.at("for", "id"):
            st.next()
            st.expect("all")
            b = st.next()
            if b.kind != "id":
                raise SyntaxErr("expected a metavariable", b.line, b.col)
            if st.at(">"):
                st.next()
                a = st.next()
                family = (b.text, ">", a.text)
            elif st.at("in"):
                st.next()
                family = (b.text, "in", _label_set(st, actions))
            else:
                st.error("expected '>' or 'in'")
        premises.append((lit, family))
        if st.at(","):
            st.next()
        elif not st.at("|-"):
            st.error("expected ',' or '|-'")
    st.expect("|-")
    concl = _parse_literal(st, sig, infix)
    if st.cur.kind != "eof":
        st.error("trailing input after conclusion")
    known = set(actions) | {TAU, IOTA}
    out = []
    for combo in itertools.product(*[vals for _, vals in metas]):
        env = dict(zip([m for m, _ in metas], combo))
        prem = []
        for (lit, tok), family in premises:
            if family is None:
                prem.append(_inst(lit, env, known, tok))
                continue
            b = family[0]
            if family[1] == ">":
                ref = env.get(family[2], family[2])
                betas = sorted(x for x, y in ((hi, lo) for lo, hi in order) if y == ref)
            else:
                betas = family[2]
            for beta in betas:
                prem.append(_inst(lit, dict(env, **{b: beta}), known, tok))
        clit, ctok = concl
        c = _inst(clit, env, known, ctok)
        suffix = "_".join(v.lstrip(ORACLE_PREFIX) for v in combo)
        rname = name + ("_" + suffix if name and suffix else "")
        out.append(Rule.make(prem, c, rname))
    return out


def _inst(lit, env, known, tok):
    label = env.get(lit.label, lit.label)
    if label not in known and not label.startswith(ORACLE_PREFIX):
        raise SyntaxErr("undeclared action %r" % label, tok.line, tok.col)
    return Literal(lit.source, label, lit.target)


def _parse_literal(st, sig, infix):
    tok = st.cur
    src = _parse_term(st, sig, infix)
    st.expect("-")
    lab = st.next()
    if lab.kind not in ("id", "oracle"):
        raise SyntaxErr("expected a label", lab.line, lab.col)
    if st.at("->"):
        st.next()
        tgt = _parse_term(st, sig, infix)
        return Literal(src, lab.text, tgt), tok
    if st.at("-/>"):
        st.next()
        return Literal(src, lab.text, None), tok
    st.error("expected '->' or '-/>'")


# --- .tss output -----------------------------------------------------------

def emit_term(t) -> str:
    return _pretty(t, top=True)


def _pretty(t, top=False):
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.symbol
    if len(t.args) == 2 and re.fullmatch(IDENT + r"|[0-9]+", t.symbol) is None:
        body = "%s %s %s" % (_pretty(t.args[0]), t.symbol, _pretty(t.args[1]))
        return body if top else "(" + body + ")"
    return "%s(%s)" % (t.symbol, ", ".join(_pretty(a, True) for a in t.args))


def emit_literal(h: Literal) -> str:
    if h.positive:
        return "%s -%s-> %s" % (emit_term(h.source), h.label, emit_term(h.target))
    return "%s -%s-/>" % (emit_term(h.source), h.label)


def emit_rule(r: Rule) -> str:
    keep = {x for x in r.variables() if not is_fresh_name(x)}
    if len(keep) != len(r.variables()):
        r = canonical(r, keep)
    head = "rule %s: " % r.name if r.name and re.fullmatch(IDENT, r.name) else ""
    return "%s%s |- %s" % (head, ", ".join(emit_literal(h) for h in r.premises),
                           emit_literal(r.conclusion))


def emit_tss(P: TSS) -> str:
    lines = []
    if P.actions:
        lines.append("actions " + ", ".join(P.actions))
    if P.order:
        lines.append("order " + ", ".join("%s < %s" % p for p in sorted(P.order)))
    for f, n in P.signature.items():
        parts = ["sig %s/%d" % (f, n)]
        if f in P.infix:
            parts.append("infix")
        if P.aleph is not None:
            parts.append("aleph(%s)" % ",".join(str(i) for g, i in sorted(P.aleph) if g == f))
        if P.lam is not None:
            parts.append("lambda(%s)" % ",".join(str(i) for g, i in sorted(P.lam) if g == f))
        lines.append(" ".join(parts))
    for r in P.rules:
        lines.append(emit_rule(r))
    return "\n".join(lines) + "\n"


# --- .aut ------------------------------------------------------------------

_HEADER = re.compile(r"\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TRANS = re.compile(r'\s*\(\s*(\d+)\s*,\s*(?:"([^"]*)"|([^,\s()]+))\s*,\s*(\d+)\s*\)\s*$')
_NAME = re.compile(r"#\s*(\d+)\s*=\s*(.*?)\s*$")


def parse_lts(text: str) -> LTS:
    header = None
    trans = []
    names: Dict[int, str] = {}
    for no, raw in enumerate(text.splitlines(), 1):
        m = _NAME.match(raw.strip())
        if m:
            names[int(m.group(1))] = m.group(2)
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise SyntaxErr("malformed header, expected des (initial, #transitions, #states)", no, 1)
            header = tuple(int(x) for x in m.groups())
            continue
        m = _TRANS.match(line)
        if not m:
            raise SyntaxErr("malformed transition", no, 1)
        s, t = int(m.group(1)), int(m.group(4))
        label = m.group(2) if m.group(2) is not None else m.group(3)
        if header and not (s < header[2] and t < header[2]):
            raise SyntaxErr("state index out of range", no, 1)
        trans.append((s, label, t))
    if header is None:
        raise SyntaxErr("missing des header")
    init, ntrans, nstates = header
    if nstates and init >= nstates:
        raise SyntaxErr("initial state out of range", 1, 1)
    if ntrans != len(trans):
        raise SyntaxErr("header announces %d transitions, found %d" % (ntrans, len(trans)), 1, 1)
    name_list = None
    if names:
        name_list = [names.get(i, str(i)) for i in range(nstates)]
    try:
        return LTS(nstates, trans, name_list, init)
    except LTSError as e:
        raise SyntaxErr(str(e)) from None


def emit_lts(l: LTS) -> str:
    lines = ["des (%d, %d, %d)" % (l.initial, len(l.transitions), l.n)]
    for s, a, t in l.transitions:
        lines.append('(%d,"%s",%d)' % (s, a, t))
    if l.names:
        for i, name in enumerate(l.names):
            lines.append("# %d = %s" % (i, name))
    return "\n".join(lines) + "\n"


# --- .hml ------------------------------------------------------------------

def parse_formula(text: str) -> Formula:
    body = "\n".join(raw.split("#", 1)[0] for raw in text.splitlines())
    st = _Stream(_hml_tokens(body))
    phi = _hml(st)
    if st.cur.kind != "eof":
        st.error("trailing input")
    return phi


def _hml_tokens(text):
    toks = []
    line, col = 1, 1
    i = 0
    pat = re.compile(r"\s+|/\\|[{}(),~<>]|" + ORACLE_PREFIX + r"[A-Za-z0-9_']+|" + IDENT)
    while i < len(text):
        m = pat.match(text, i)
        if not m:
            raise SyntaxErr("unexpected character %r" % text[i], line, col)
        s = m.group()
        if not s.isspace():
            kind = "id" if re.fullmatch(IDENT, s) or s.startswith(ORACLE_PREFIX) else "op"
            toks.append(Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        i = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


def _hml(st: _Stream) -> Formula:
    tok = st.cur
    if st.at("T", "id"):
        st.next()
        return Conj(())
    if st.at("D", "id"):
        st.next()
        return DeltaMod(_hml(st))
    if st.at("~"):
        st.next()
        return Neg(_hml(st))
    if st.at("("):
        st.next()
        phi = _hml(st)
        st.expect(")")
        return phi
    if st.at("/\\"):
        st.next()
        st.expect("{")
        parts = []
        if not st.at("}"):
            parts.append(_hml(st))
            while st.at(","):
                st.next()
                parts.append(_hml(st))
        st.expect("}")
        return Conj(tuple(parts))
    if st.at("<"):
        st.next()
        lab = st.next()
        if lab.kind != "id":
            raise SyntaxErr("expected a label", lab.line, lab.col)
        st.expect(">")
        body = _hml(st)
        if lab.text == "eps":
            return EpsDiam(body)
        if lab.text == "that":
            return TauHatDiam(body)
        return Diam(lab.text, body)
    st.error("expected a formula")
    return tok


def emit_formula(phi: Formula) -> str:
    if isinstance(phi, Conj):
        if not phi.parts:
            return "T"
        return "/\\{%s}" % ", ".join(emit_formula(p) for p in phi.parts)
    if isinstance(phi, Neg):
        return "~" + emit_formula(phi.body)
    if isinstance(phi, Diam):
        return "<%s>%s" % (phi.action, emit_formula(phi.body))
    if isinstance(phi, EpsDiam):
        return "<eps>" + emit_formula(phi.body)
    if isinstance(phi, TauHatDiam):
        return "<that>" + emit_formula(phi.body)
    if isinstance(phi, DeltaMod):
        return "D " + emit_formula(phi.body)
    raise TypeError(phi)


def load(path: str):
    """Parse a file by extension."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".tss"):
        return parse_tss(text)
    if path.endswith(".aut"):
        return parse_lts(text)
    if path.endswith(".hml"):
        return parse_formula(text)
    raise SyntaxErr("unknown file type: %s" % path)
