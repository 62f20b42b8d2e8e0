"""Polynomials in random and deterministic matrix symbols.

A word is stored as letters ``X_i^eps D`` where ``D`` is the (possibly
empty) product of deterministic symbols sitting between this random letter
and the next one, cyclically.  Consecutive random letters get an identity
in between; leading deterministic symbols are rotated to the end, which is
harmless under the trace.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ShapeError, UnboundSymbolError


@dataclass(frozen=True)
class Letter:
    symbol: int
    transposed: bool = False
    dets: tuple[str, ...] = ()

    def __str__(self) -> str:
        s = f"X{self.symbol}" + ("^T" if self.transposed else "")
        return s + "".join(f"D{d}" for d in self.dets)


@dataclass(frozen=True)
class Monomial:
    """A coefficient times the trace of a word.

    ``letters`` is empty for a purely deterministic word, whose trace is the
    constant ``Tr(prod of dets)``.
    """

    letters: tuple[Letter, ...]
    coef: complex = 1.0
    dets: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        body = "".join(str(l) for l in self.letters) or "".join(f"D{d}" for d in self.dets)
        return f"({self.coef})*Tr[{body}]"


def _token(tok) -> tuple[str, object, bool]:
    if isinstance(tok, str):
        raise ShapeError(f"letter must be a list like ['X', 1] or ['D', 'A'], got {tok!r}")
    tok = list(tok)
    if not tok or tok[0] not in ("X", "D"):
        raise ShapeError(f"letter must start with 'X' or 'D': {tok!r}")
    if tok[0] == "X":
        if len(tok) not in (2, 3) or isinstance(tok[1], bool) or not isinstance(tok[1], int):
            raise ShapeError(f"random letter must be ['X', i] or ['X', i, 'T']: {tok!r}")
        if len(tok) == 3 and tok[2] not in ("T", "⊤"):
            raise ShapeError(f"transpose mark must be 'T': {tok!r}")
        return "X", tok[1], len(tok) == 3
    if len(tok) != 2:
        raise ShapeError(f"deterministic letter must be ['D', j]: {tok!r}")
    return "D", str(tok[1]), False


def parse_word(tokens: Sequence, coef: complex = 1.0) -> Monomial:
    parsed = [_token(t) for t in tokens]
    if not parsed:
        raise ShapeError("empty word")
    first_x = next((k for k, p in enumerate(parsed) if p[0] == "X"), None)
    if first_x is None:
        return Monomial((), complex(coef), tuple(p[1] for p in parsed))
    parsed = parsed[first_x:] + parsed[:first_x]
    letters: list[Letter] = []
    for kind, val, tr in parsed:
        if kind == "X":
            letters.append(Letter(val, tr, ()))
        else:
            last = letters[-1]
            letters[-1] = Letter(last.symbol, last.transposed, last.dets + (val,))
    return Monomial(tuple(letters), complex(coef))


@dataclass(frozen=True)
class PolynomialSpec:
    monomials: tuple[Monomial, ...]
    name: str = "P"

    def __post_init__(self):
        if not self.monomials:
            raise ShapeError("a polynomial needs at least one monomial")

    @classmethod
    def from_words(cls, words: Iterable, name: str = "P") -> "PolynomialSpec":
        """Each item is a token list, or a pair ``(coef, tokens)``.

        >>> PolynomialSpec.from_words([[["X", 1], ["X", 1]]]).degree
        2
        """
        monos = []
        for item in words:
            if isinstance(item, dict):
                monos.append(parse_word(item["word"], _coef(item.get("coef", 1))))
            elif len(item) == 2 and not isinstance(item[0], (list, tuple)):
                monos.append(parse_word(item[1], _coef(item[0])))
            else:
                monos.append(parse_word(item))
        return cls(tuple(monos), name)

    @property
    def degree(self) -> int:
        return max(m.length for m in self.monomials)

    @property
    def random_symbols(self) -> set[int]:
        return {l.symbol for m in self.monomials for l in m.letters}

    @property
    def det_symbols(self) -> set[str]:
        out = set()
        for m in self.monomials:
            out.update(m.dets)
            for l in m.letters:
                out.update(l.dets)
        return out

    def __str__(self) -> str:
        return " + ".join(str(m) for m in self.monomials)


def _coef(c) -> complex:
    if isinstance(c, (list, tuple)):
        if len(c) != 2:
            raise ShapeError(f"complex coefficient must be [re, im]: {c!r}")
        return complex(c[0], c[1])
    return complex(c)


def monomial_spec(tokens: Sequence, coef: complex = 1.0) -> PolynomialSpec:
    return PolynomialSpec((parse_word(tokens, coef),))


class DeterministicSet:
    """Named N×N complex matrices with cached products and norms."""

    def __init__(self, N: int, matrices: Mapping[str, np.ndarray]):
        if N < 1:
            raise ShapeError("dimension must be positive")
        self.N = N
        self.matrices = {}
        for name, mat in matrices.items():
            arr = np.asarray(mat, dtype=complex)
            if arr.shape != (N, N):
                raise ShapeError(f"matrix {name!r} has shape {arr.shape}, expected ({N}, {N})")
            arr.setflags(write=False)
            self.matrices[str(name)] = arr
        self._products: dict = {}
        self._norms: dict = {}
        self._abs_norms: dict = {}

    def require(self, spec: PolynomialSpec) -> None:
        missing = spec.det_symbols - set(self.matrices)
        if missing:
            raise UnboundSymbolError(f"no deterministic matrix bound to {sorted(missing)}")

    def matrix(self, dets: tuple[str, ...]) -> np.ndarray:
        """Product of the named matrices; identity for the empty product."""
        if dets not in self._products:
            out = np.eye(self.N, dtype=complex)
            for d in dets:
                if d not in self.matrices:
                    raise UnboundSymbolError(f"no deterministic matrix bound to {d!r}")
                out = out @ self.matrices[d]
            out.setflags(write=False)
            self._products[dets] = out
        return self._products[dets]

    def norm(self, dets: tuple[str, ...]) -> float:
        if dets not in self._norms:
            from .randmat import operator_norm

            self._norms[dets] = operator_norm(self.matrix(dets))
        return self._norms[dets]

    def abs_norm(self, dets: tuple[str, ...]) -> float:
        if dets not in self._abs_norms:
            from .randmat import operator_norm

            self._abs_norms[dets] = operator_norm(np.abs(self.matrix(dets)))
        return self._abs_norms[dets]


def identity_set(N: int) -> DeterministicSet:
    return DeterministicSet(N, {})

