#!/usr/bin/env python3
"""Exact Laurent polynomials in v_0, ..., v_{k-1} with integer coefficients."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from sympy import Add, Integer, Mul, Symbol, expand, symbols

from .errors import SpecFormatError

log = logging.getLogger(__name__)

Exponent = tuple[int, ...]


@dataclass(frozen=True)
class LaurentScalar:
    nvars: int
    terms: tuple[tuple[Exponent, int], ...] = ()

    @classmethod
    def from_mapping(cls, nvars: int, mapping: Mapping[Exponent, int]) -> "LaurentScalar":
        items = []
        for e, c in mapping.items():
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has the wrong length for {nvars} variables")
            if c:
                items.append((tuple(e), int(c)))
        return cls(nvars, tuple(sorted(items)))

    @classmethod
    def zero(cls, nvars: int = 1) -> "LaurentScalar":
        return cls(nvars)

    @classmethod
    def constant(cls, c: int, nvars: int = 1) -> "LaurentScalar":
        return cls.from_mapping(nvars, {(0,) * nvars: c})

    @classmethod
    def one(cls, nvars: int = 1) -> "LaurentScalar":
        return cls.constant(1, nvars)

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff: int = 1) -> "LaurentScalar":
        return cls.from_mapping(len(exponent), {tuple(exponent): coeff})

    @classmethod
    def variable(cls, j: int, power: int = 1, nvars: int = 1) -> "LaurentScalar":
        e = [0] * nvars
        e[j] = power
        return cls.monomial(e)

    @classmethod
    def quantum_difference(cls, j: int, k: int, nvars: int = 1) -> "LaurentScalar":
        """v_j^k − v_j^{−k}."""
        return cls.variable(j, k, nvars) - cls.variable(j, -k, nvars)

    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e, _ in self.terms)

    def _check(self, other: "LaurentScalar") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"Laurent scalars in {self.nvars} and {other.nvars} variables")

    def __add__(self, other: "LaurentScalar") -> "LaurentScalar":
        self._check(other)
        out = self.as_dict()
        for e, c in other.terms:
            out[e] = out.get(e, 0) + c
        return LaurentScalar.from_mapping(self.nvars, out)

    def __neg__(self) -> "LaurentScalar":
        return LaurentScalar(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "LaurentScalar") -> "LaurentScalar":
        return self + (-other)

    def __mul__(self, other: "LaurentScalar | int") -> "LaurentScalar":
        if isinstance(other, int):
            return LaurentScalar.from_mapping(self.nvars, {e: c * other for e, c in self.terms})
        self._check(other)
        out: dict[Exponent, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentScalar.from_mapping(self.nvars, out)

    __rmul__ = __mul__

    def bar(self) -> "LaurentScalar":
        """v_j ↦ v_j^{-1}."""
        return LaurentScalar.from_mapping(self.nvars, {tuple(-x for x in e): c for e, c in self.terms})

    def specialize(self) -> int:
        """Value at v_j = 1."""
        return sum(c for _, c in self.terms)

    def to_sympy(self, names: Sequence[Symbol] | None = None):
        gens = list(names) if names is not None else default_symbols(self.nvars)
        total = Integer(0)
        for e, c in self.terms:
            term = Integer(c)
            for g, k in zip(gens, e):
                term *= g**k
            total += term
        return total

    def __str__(self) -> str:
        return str(self.to_sympy()) if self.terms else "0"


def default_symbols(nvars: int) -> list[Symbol]:
    if nvars == 1:
        return [Symbol("v")]
    return list(symbols(f"v0:{nvars}"))


def from_sympy(expr, names: Sequence[Symbol]) -> LaurentScalar:
    """Parse an expanded Laurent polynomial in ``names`` with integer coefficients."""
    nvars = len(names)
    out: dict[Exponent, int] = {}
    log.debug("parsing %s in %s", expr, list(names))
    for term in Add.make_args(expand(expr)):
        coeff, rest = term.as_coeff_Mul()
        if not coeff.is_integer:
            raise SpecFormatError(f"non-integral coefficient {coeff} in {expr}")
        exps = [0] * nvars
        for factor in Mul.make_args(rest):
            if factor == 1:
                continue
            base, power = factor.as_base_exp()
            if base not in names or not power.is_integer:
                raise SpecFormatError(f"{factor} is not a monomial in {list(names)}")
            exps[list(names).index(base)] += int(power)
        key = tuple(exps)
        out[key] = out.get(key, 0) + int(coeff)
    return LaurentScalar.from_mapping(nvars, out)


def scalar_sum(values: Iterable[LaurentScalar], nvars: int) -> LaurentScalar:
    total = LaurentScalar.zero(nvars)
    for v in values:
        total = total + v
    return total
