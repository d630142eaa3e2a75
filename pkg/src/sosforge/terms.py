"""Signatures, open and closed terms, substitutions and matching."""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

# Fresh variables carry this prefix; no parser accepts it.
FRESH_PREFIX = "%"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


class TermError(Exception):
    """Malformed term or signature."""


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class App:
    symbol: str
    args: Tuple[object, ...] = ()

    def __str__(self):
        if not self.args:
            return self.symbol
        if len(self.args) == 2 and not _IDENT.match(self.symbol):
            return "(%s %s %s)" % (self.args[0], self.symbol, self.args[1])
        return "%s(%s)" % (self.symbol, ", ".join(str(a) for a in self.args))


def const(name: str) -> App:
    return App(name, ())


def app(symbol: str, *args) -> App:
    return App(symbol, tuple(args))


class Signature:
    """Finite set of function symbols with arities."""

    def __init__(self, symbols: Mapping[str, int] = ()):
        self._arity: Dict[str, int] = {}
        for name, n in dict(symbols).items():
            self.add(name, n)

    def add(self, name: str, arity: int):
        if arity < 0:
            raise TermError("negative arity for %r" % name)
        if name in self._arity and self._arity[name] != arity:
            raise TermError("symbol %r redeclared with arity %d" % (name, arity))
        self._arity[name] = arity

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise TermError("undeclared symbol %r" % name) from None

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(sorted(self._arity))

    def __len__(self):
        return len(self._arity)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._arity == other._arity

    def __hash__(self):
        return hash(frozenset(self._arity.items()))

    def items(self):
        return sorted(self._arity.items())

    def constants(self):
        return [f for f, n in self.items() if n == 0]

    def operators(self):
        return [f for f, n in self.items() if n > 0]

    def copy(self) -> "Signature":
        return Signature(dict(self._arity))

    def check(self, t) -> None:
        """Raise TermError unless t is well-formed over this signature."""
        if isinstance(t, Var):
            return
        if self.arity(t.symbol) != len(t.args):
            raise TermError(
                "arity mismatch: %s expects %d arguments, got %d"
                % (t.symbol, self.arity(t.symbol), len(t.args))
            )
        for a in t.args:
            self.check(a)

    def __repr__(self):
        return "Signature(%r)" % dict(self.items())


def variables(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out = set()
    for a in t.args:
        out |= variables(a)
    return frozenset(out)


def var_occurrences(t) -> Iterator[Tuple[str, Tuple[int, ...]]]:
    """Yield (variable, path) for every variable occurrence; paths use 1-based indices."""

    def walk(u, path):
        if isinstance(u, Var):
            yield u.name, path
        else:
            for i, a in enumerate(u.args, 1):
                yield from walk(a, path + (i,))

    yield from walk(t, ())


def is_closed(t) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_closed(a) for a in t.args)


def size(t) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(size(a) for a in t.args)


def depth(t) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def subterms(t):
    """All subterms of t including t itself."""
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def apply(s: Mapping[str, object], t):
    if isinstance(t, Var):
        return s.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, tuple(apply(s, a) for a in t.args))


def compose(s1: Mapping, s2: Mapping) -> dict:
    """Substitution equivalent to applying s1 and then s2."""
    out = {x: apply(s2, u) for x, u in s1.items()}
    for x, u in s2.items():
        out.setdefault(x, u)
    return out


def match(pattern, target, s: Optional[dict] = None) -> Optional[dict]:
    """Extend s so that apply(s, pattern) == target, or return None."""
    s = {} if s is None else dict(s)
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = s.get(p.name)
            if bound is None:
                s[p.name] = t
            elif bound != t:
                return None
        elif isinstance(t, App) and p.symbol == t.symbol and len(p.args) == len(t.args):
            stack.extend(zip(p.args, t.args))
        else:
            return None
    return s


_counter = itertools.count()
_lock = threading.Lock()


def fresh_var(hint: str = "v") -> Var:
    with _lock:
        n = next(_counter)
    return Var("%s%s%d" % (FRESH_PREFIX, hint, n))


def is_fresh_name(name: str) -> bool:
    return name.startswith(FRESH_PREFIX)

