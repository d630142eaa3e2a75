"""Modal formula syntax tree."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple


class Formula:
    __slots__ = ()

    def __str__(self):
        s = self.__dict__.get("_str")
        if s is None:
            from .syntax import emit_formula
            s = emit_formula(self)
            object.__setattr__(self, "_str", s)
        return s


@dataclass(frozen=True, repr=False)
class Conj(Formula):
    parts: Tuple[Formula, ...] = ()

    def __repr__(self):
        return "Conj(%r)" % (self.parts,)


@dataclass(frozen=True, repr=False)
class Neg(Formula):
    body: Formula

    def __repr__(self):
        return "Neg(%r)" % (self.body,)


@dataclass(frozen=True, repr=False)
class Diam(Formula):
    action: str
    body: Formula

    def __repr__(self):
        return "Diam(%r, %r)" % (self.action, self.body)


@dataclass(frozen=True, repr=False)
class EpsDiam(Formula):
    body: Formula

    def __repr__(self):
        return "EpsDiam(%r)" % (self.body,)


@dataclass(frozen=True, repr=False)
class TauHatDiam(Formula):
    body: Formula

    def __repr__(self):
        return "TauHatDiam(%r)" % (self.body,)


@dataclass(frozen=True, repr=False)
class DeltaMod(Formula):
    body: Formula

    def __repr__(self):
        return "DeltaMod(%r)" % (self.body,)


def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        object.__setattr__(self, "_hash", h)
    return h


# deep formulas are hashed often; dataclass hashing would re-walk the tree each time
for _cls in (Conj, Neg, Diam, EpsDiam, TauHatDiam, DeltaMod):
    _cls.__hash__ = _cached_hash

TOP = Conj(())
BOT = Neg(TOP)


def conj(*parts) -> Formula:
    return Conj(tuple(parts))


def subformulas(phi):
    yield phi
    if isinstance(phi, Conj):
        for p in phi.parts:
            yield from subformulas(p)
    elif not isinstance(phi, Conj):
        yield from subformulas(phi.body)


@lru_cache(maxsize=65536)
def has_delta(phi) -> bool:
    return any(isinstance(p, DeltaMod) for p in subformulas(phi))


def fsize(phi) -> int:
    return sum(1 for _ in subformulas(phi))
