#!/usr/bin/env python3
"""Exact integer linear algebra: Smith normal form, kernels, cokernels, fixed lattices.

Every lattice computation in the package goes through this module. Matrices
are immutable, entries are Python ints, and products/determinants are done
by sympy's ``DomainMatrix`` over ``ZZ`` so nothing ever touches floating point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, NamedTuple, Sequence

from sympy import Matrix, Rational
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import OrderBoundExceeded

log = logging.getLogger(__name__)

Vector = tuple[int, ...]


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    if len(u) != len(v):
        raise ValueError(f"pairing of vectors of length {len(u)} and {len(v)}")
    return sum(a * b for a, b in zip(u, v))


def add(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(k: int, u: Sequence[int]) -> Vector:
    return tuple(k * a for a in u)


@dataclass(frozen=True)
class IntegerMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows:
            raise ValueError(f"expected {self.rows} rows, got {len(self.entries)}")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError(f"row of length {len(row)} in a matrix with {self.cols} columns")
            for x in row:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise ValueError(f"non-integer entry {x!r}")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: int | None = None) -> "IntegerMatrix":
        data = tuple(tuple(int(x) for x in row) for row in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence[int]], rows: int) -> "IntegerMatrix":
        cols = [tuple(int(x) for x in c) for c in columns]
        for c in cols:
            if len(c) != rows:
                raise ValueError(f"column of length {len(c)}, expected {rows}")
        return cls(rows, len(cols), tuple(tuple(c[i] for c in cols) for i in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def from_sympy(cls, m: Matrix) -> "IntegerMatrix":
        data = []
        for i in range(m.rows):
            row = []
            for j in range(m.cols):
                x = m[i, j]
                if not x.is_integer:
                    raise ValueError(f"non-integral entry {x} at ({i}, {j})")
                row.append(int(x))
            data.append(tuple(row))
        return cls(m.rows, m.cols, tuple(data))

    # -- views ------------------------------------------------------------

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def to_sympy(self) -> Matrix:
        return Matrix(self.rows, self.cols, [x for r in self.entries for x in r])

    def to_domain(self) -> DomainMatrix:
        return DomainMatrix([[ZZ(x) for x in r] for r in self.entries], (self.rows, self.cols), ZZ)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_identity(self) -> bool:
        return self.is_square and self == IntegerMatrix.identity(self.rows)

    # -- arithmetic --------------------------------------------------------

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        if 0 in (self.rows, self.cols, other.cols):
            return IntegerMatrix.zeros(self.rows, other.cols)
        return IntegerMatrix.from_sympy((self.to_domain() * other.to_domain()).to_Matrix())

    def __add__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        self._same_shape(other)
        return IntegerMatrix(
            self.rows, self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __sub__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        self._same_shape(other)
        return IntegerMatrix(
            self.rows, self.cols,
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __neg__(self) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.entries))

    def _same_shape(self, other: "IntegerMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def apply(self, vec: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        if len(vec) != self.cols:
            raise ValueError(f"vector of length {len(vec)} for a matrix with {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self.entries)

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else tuple(() for _ in range(self.cols)))

    def hstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.rows != other.rows:
            raise ValueError("hstack needs equal row counts")
        return IntegerMatrix(self.rows, self.cols + other.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def vstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.cols:
            raise ValueError("vstack needs equal column counts")
        return IntegerMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def det(self) -> int:
        if not self.is_square:
            raise ValueError("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        return int(self.to_domain().det())

    def is_unimodular(self) -> bool:
        return self.is_square and self.det() in (1, -1)

    def inverse(self) -> "IntegerMatrix":
        """Inverse of a unimodular matrix."""
        if not self.is_unimodular():
            raise ValueError("only unimodular matrices have integral inverses")
        if self.rows == 0:
            return self
        return IntegerMatrix.from_sympy(self.to_sympy().inv())

    def power(self, k: int) -> "IntegerMatrix":
        if k < 0:
            return self.inverse().power(-k)
        result = IntegerMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result


def multiplicative_order(A: IntegerMatrix, bound: int = 24) -> int:
    if not A.is_square:
        raise ValueError("order of a non-square matrix")
    ident = IntegerMatrix.identity(A.rows)
    current = A
    for k in range(1, bound + 1):
        if current == ident:
            return k
        current = current @ A
    raise OrderBoundExceeded(
        f"matrix has no finite order up to {bound}",
        witness={"matrix": A.to_list(), "bound": bound},
    )


@dataclass(frozen=True)
class FinGenAbelianGroup:
    free_rank: int = 0
    torsion_invariants: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        prev = 1
        for d in self.torsion_invariants:
            if d < 2:
                raise ValueError(f"torsion invariant {d} must be at least 2")
            if d % prev:
                raise ValueError(f"divisibility chain broken at {prev} | {d}")
            prev = d

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion_invariants

    @property
    def order(self) -> int | None:
        if not self.is_finite:
            return None
        n = 1
        for d in self.torsion_invariants:
            n *= d
        return n

    @property
    def label(self) -> str:
        parts = [f"Z^{self.free_rank}"] if self.free_rank else []
        parts += [f"Z/{d}" for d in self.torsion_invariants]
        return " x ".join(parts) if parts else "1"

    def to_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion_invariants": list(self.torsion_invariants), "label": self.label}

    @classmethod
    def from_finite_elements(cls, elements: Sequence[Sequence[int]], moduli: Sequence[int]) -> "FinGenAbelianGroup":
        """Structure of the subgroup of ⊕ ℤ/m_i generated by ``elements``."""
        k = len(moduli)
        if not elements or k == 0:
            return cls()
        gens = IntegerMatrix.from_columns(elements, k)
        relation_map = gens.hstack(_diagonal(moduli))
        relations = [v[: len(elements)] for v in kernel_basis(relation_map)]
        return cokernel(IntegerMatrix.from_columns(relations, len(elements))).group


def _diagonal(ds: Sequence[int]) -> IntegerMatrix:
    n = len(ds)
    return IntegerMatrix(n, n, tuple(tuple(ds[i] if i == j else 0 for j in range(n)) for i in range(n)))


class SmithForm(NamedTuple):
    S: IntegerMatrix
    U: IntegerMatrix
    V: IntegerMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        """Nonzero diagonal entries d_1 | d_2 | ... (the rank is their count)."""
        out = []
        for i in range(min(self.S.rows, self.S.cols)):
            d = self.S.entries[i][i]
            if d == 0:
                break
            out.append(d)
        return tuple(out)


def smith_normal_form(M: IntegerMatrix) -> SmithForm:
    """Return (S, U, V) with S = U·M·V diagonal, U and V unimodular.

    Pivot on the smallest nonzero entry, clear its row and column by
    Euclidean steps, and when a later entry is not divisible by the pivot
    pull its row into the pivot row and start over on that position.
    """
    m, n = M.rows, M.cols
    A = [list(r) for r in M.entries]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i: int, j: int) -> None:
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i: int, j: int) -> None:
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(target: int, source: int, k: int) -> None:
        A[target] = [a + k * b for a, b in zip(A[target], A[source])]
        U[target] = [a + k * b for a, b in zip(U[target], U[source])]

    def add_col(target: int, source: int, k: int) -> None:
        for row in A:
            row[target] += k * row[source]
        for row in V:
            row[target] += k * row[source]

    for s in range(min(m, n)):
        pivot = _min_abs_position(A, s, range(s, m), range(s, n))
        if pivot is None:
            break
        swap_rows(s, pivot[0])
        swap_cols(s, pivot[1])
        while True:
            p = A[s][s]
            dirty = False
            for i in range(s + 1, m):
                if A[i][s]:
                    add_row(i, s, -(A[i][s] // p))
                    dirty = dirty or A[i][s] != 0
            for j in range(s + 1, n):
                if A[s][j]:
                    add_col(j, s, -(A[s][j] // p))
                    dirty = dirty or A[s][j] != 0
            if dirty:
                cross = [(s, j) for j in range(s, n) if A[s][j]] + [(i, s) for i in range(s + 1, m) if A[i][s]]
                i, j = min(cross, key=lambda ij: abs(A[ij[0]][ij[1]]))
                swap_rows(s, i)
                swap_cols(s, j)
                continue
            bad = next(
                ((i, j) for i in range(s + 1, m) for j in range(s + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(s, bad[0], 1)
        if A[s][s] < 0:
            A[s] = [-a for a in A[s]]
            U[s] = [-a for a in U[s]]

    log.debug("smith normal form of a %dx%d matrix", m, n)
    return SmithForm(
        IntegerMatrix.from_rows(A, n),
        IntegerMatrix.from_rows(U, m),
        IntegerMatrix.from_rows(V, n),
    )


def _min_abs_position(A: list[list[int]], s: int, rows: range, cols: range) -> tuple[int, int] | None:
    best = None
    for i in rows:
        for j in cols:
            if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                best = (i, j)
    return best


@dataclass(frozen=True)
class Cokernel:
    """ℤ^rows / image(M) with canonical coordinates.

    ``reduce`` sends a vector to (torsion coordinates mod d_i, then free
    coordinates); ``lift`` goes back to some preimage.
    """

    matrix: IntegerMatrix
    group: FinGenAbelianGroup
    transform: IntegerMatrix
    transform_inverse: IntegerMatrix
    moduli: tuple[int, ...]
    positions: tuple[int, ...] = field(repr=False)

    @property
    def quotient_map(self) -> IntegerMatrix:
        """Rows of the transform that survive in the quotient (no reduction mod d_i)."""
        return IntegerMatrix.from_rows([self.transform.row(i) for i in self.positions], self.transform.cols)

    def reduce(self, vec: Sequence[int]) -> Vector:
        y = self.transform.apply(vec)
        return tuple(y[i] % d if d else y[i] for i, d in zip(self.positions, self.moduli))

    def lift(self, coords: Sequence[int]) -> Vector:
        if len(coords) != len(self.positions):
            raise ValueError(f"expected {len(self.positions)} quotient coordinates")
        y = [0] * self.matrix.rows
        for i, c in zip(self.positions, coords):
            y[i] = int(c)
        return self.transform_inverse.apply(y)

    def is_zero(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce(vec))

    def normalize(self, coords: Sequence[int]) -> Vector:
        return tuple(c % d if d else c for c, d in zip(coords, self.moduli))

    def torsion_elements(self) -> list[Vector]:
        """All elements of the torsion subgroup, in canonical coordinates."""
        ranges = [range(d) if d else range(1) for d in self.moduli]
        return [tuple(c) for c in product(*ranges)]


def cokernel(M: IntegerMatrix) -> Cokernel:
    snf = smith_normal_form(M)
    diag = snf.diagonal
    r = len(diag)
    positions: list[int] = []
    moduli: list[int] = []
    for i, d in enumerate(diag):
        if d >= 2:
            positions.append(i)
            moduli.append(d)
    for i in range(r, M.rows):
        positions.append(i)
        moduli.append(0)
    group = FinGenAbelianGroup(M.rows - r, tuple(d for d in diag if d >= 2))
    return Cokernel(M, group, snf.U, snf.U.inverse(), tuple(moduli), tuple(positions))


def coinvariants(A: IntegerMatrix) -> Cokernel:
    """ℤ^n modulo the image of A − 1."""
    return cokernel(A - IntegerMatrix.identity(A.rows))


def kernel_basis(M: IntegerMatrix) -> list[Vector]:
    """Basis of ker(M) ⊂ ℤ^cols; saturated because V is unimodular."""
    snf = smith_normal_form(M)
    r = len(snf.diagonal)
    return [snf.V.column(j) for j in range(r, M.cols)]


def fixed_sublattice(A: IntegerMatrix, order_bound: int = 24) -> list[Vector]:
    if not A.is_square:
        raise ValueError("fixed sublattice needs a square matrix")
    multiplicative_order(A, order_bound)
    return kernel_basis(A - IntegerMatrix.identity(A.rows))


invariants = fixed_sublattice


def solve_integer(M: IntegerMatrix, b: Sequence[int]) -> Vector | None:
    """Some integral x with M·x = b, or None."""
    if len(b) != M.rows:
        raise ValueError("right-hand side has the wrong length")
    snf = smith_normal_form(M)
    diag = snf.diagonal
    c = snf.U.apply(b)
    y = [0] * M.cols
    for i, ci in enumerate(c):
        if i < len(diag):
            if ci % diag[i]:
                return None
            y[i] = ci // diag[i]
        elif ci:
            return None
    return snf.V.apply(y)


def lattice_basis(vectors: Sequence[Sequence[int]], dim: int) -> list[Vector]:
    """A basis of the ℤ-span of ``vectors`` inside ℤ^dim."""
    vecs = [tuple(v) for v in vectors if any(v)]
    if not vecs:
        return []
    M = IntegerMatrix.from_columns(vecs, dim)
    snf = smith_normal_form(M)
    inv = snf.U.inverse()
    return [tuple(d * x for x in inv.column(i)) for i, d in enumerate(snf.diagonal)]


def rational_solve(columns: Sequence[Sequence], b: Sequence) -> tuple[Rational, ...] | None:
    """Unique rational coordinates of b in the span of linearly independent columns."""
    if not columns:
        return () if not any(b) else None
    M = Matrix([[Rational(c[i]) for c in columns] for i in range(len(b))])
    try:
        sol, params = M.gauss_jordan_solve(Matrix([Rational(x) for x in b]))
    except ValueError:
        return None
    if params.shape[0]:
        raise ValueError("columns are linearly dependent")
    return tuple(Rational(x) for x in sol)


@dataclass(frozen=True)
class FixedQuotient:
    """Invariants of an automorphism F on ℤ^n / Y.

    ``basis`` spans L = {λ : (F − 1)λ ∈ Y}; ``relations`` are the columns of
    Y written in that basis; ``quotient`` is L / Y.
    """

    basis: tuple[Vector, ...]
    relations: IntegerMatrix
    quotient: Cokernel

    def to_ambient(self, coords: Sequence[int]) -> Vector:
        n = len(self.basis[0]) if self.basis else 0
        out = [0] * n
        for c, b in zip(coords, self.basis):
            for i in range(n):
                out[i] += c * b[i]
        return tuple(out)


def fixed_quotient(F: IntegerMatrix, Y: Sequence[Sequence[int]]) -> FixedQuotient:
    n = F.rows
    ycols = [tuple(y) for y in Y]
    shifted = F - IntegerMatrix.identity(n)
    if ycols:
        stacked = shifted.hstack(-IntegerMatrix.from_columns(ycols, n))
        basis = lattice_basis([v[:n] for v in kernel_basis(stacked)], n)
    else:
        basis = kernel_basis(shifted)
    if not basis:
        return FixedQuotient((), IntegerMatrix.zeros(0, len(ycols)), cokernel(IntegerMatrix.zeros(0, len(ycols))))
    B = IntegerMatrix.from_columns(basis, n)
    rel_cols = []
    for y in ycols:
        coords = solve_integer(B, y)
        if coords is None:
            raise ArithmeticError(f"relation {y} is not in the fixed lattice")
        rel_cols.append(coords)
    relations = IntegerMatrix.from_columns(rel_cols, len(basis)) if rel_cols else IntegerMatrix.zeros(len(basis), 0)
    return FixedQuotient(tuple(basis), relations, cokernel(relations))
