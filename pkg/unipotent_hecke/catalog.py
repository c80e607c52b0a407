#!/usr/bin/env python3
"""Built-in group specs and the ``builtin:NAME`` / file resolver."""

from __future__ import annotations

import logging
from functools import lru_cache

from .components import ComponentEntry
from .group_spec import GroupSpec, read_group_spec
from .integer_modules import IntegerMatrix
from .root_datum import BasedRootDatum, split_datum

log = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"


def _swap(n: int, i: int, j: int) -> IntegerMatrix:
    rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    rows[i], rows[j] = rows[j], rows[i]
    return IntegerMatrix.from_rows(rows, n)


def _from_datum(
    D: BasedRootDatum,
    name: str,
    description: str,
    frobenius: IntegerMatrix | None = None,
    delta0: tuple[int, ...] = (),
) -> GroupSpec:
    return GroupSpec(
        name=name,
        rank=D.rank,
        roots=D.roots,
        coroots=D.coroots,
        simple_indices=D.simple_indices,
        frobenius=frobenius if frobenius is not None else IntegerMatrix.identity(D.rank),
        delta0=delta0,
        components=(ComponentEntry(),),
        description=description,
    )


def _gl2() -> GroupSpec:
    D = BasedRootDatum(2, ((1, -1), (-1, 1)), ((1, -1), (-1, 1)), (0,), "GL2")
    return _from_datum(D, "GL2", "split GL2: X* = Z^2, central torus of rank 1")


def _gl2_gl1() -> GroupSpec:
    D = BasedRootDatum(3, ((1, -1, 0), (-1, 1, 0)), ((1, -1, 0), (-1, 1, 0)), (0,), "GL2xGL1")
    return _from_datum(D, "GL2xGL1", "split GL2 x GL1: X* = Z^3, central torus of rank 2")


_BUILDERS = {
    "SL2": lambda: _from_datum(split_datum("A1", "sc"), "SL2", "split SL2"),
    "PGL2": lambda: _from_datum(split_datum("A1", "adjoint"), "PGL2", "split PGL2"),
    "SL3": lambda: _from_datum(split_datum("A2", "sc"), "SL3", "split SL3"),
    "PGL3": lambda: _from_datum(split_datum("A2", "adjoint"), "PGL3", "split PGL3"),
    "Sp4": lambda: _from_datum(split_datum("C2", "sc"), "Sp4", "split Sp4"),
    "SO5": lambda: _from_datum(split_datum("B2", "adjoint"), "SO5", "split SO5"),
    "GL2": _gl2,
    "GL2xGL1": _gl2_gl1,
    "G2": lambda: _from_datum(split_datum("G2", "sc"), "G2", "split G2"),
    "SU3": lambda: _from_datum(split_datum("A2", "sc"), "SU3", "unramified quasi-split SU3", _swap(2, 0, 1)),
    "SU4": lambda: _from_datum(split_datum("A3", "sc"), "SU4", "unramified quasi-split SU4", _swap(3, 0, 2)),
    "ANISO_PGL3": lambda: _from_datum(
        split_datum("A2", "adjoint"), "ANISO_PGL3", "anisotropic inner form of PGL3 (delta0 = all simple roots)", delta0=(0, 1)
    ),
}

BUILTIN_NAMES = tuple(_BUILDERS)


@lru_cache(maxsize=None)
def builtin_group(name: str) -> GroupSpec:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin group {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None


def list_builtins() -> list[dict]:
    out = []
    for name in BUILTIN_NAMES:
        spec = builtin_group(name)
        out.append({"name": name, "rank": spec.rank, "delta0": list(spec.delta0), "description": spec.description})
    return out


def load_group(ref: str) -> GroupSpec:
    """``builtin:NAME`` or a path to a group-spec file."""
    if ref.startswith(BUILTIN_PREFIX):
        return builtin_group(ref[len(BUILTIN_PREFIX):])
    return read_group_spec(ref)
