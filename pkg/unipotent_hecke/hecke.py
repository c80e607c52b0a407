#!/usr/bin/env python3
"""Affine Hecke algebras with exact Laurent coefficients.

Two presentations share one element type:

* Bernstein: basis θ_x N_w ω (x ∈ X, w ∈ W(R), ω ∈ omega_ext), multiplied
  with the quadratic relation N_s² = 1 + (v^λ − v^{−λ})N_s and the
  Bernstein–Lusztig–Zelevinsky cross relation.
* Iwahori–Matsumoto: basis T_g ω for g = t_x w in X ⋊ W(R), multiplied by
  reduced words of affine simple reflections.

Conversions between the two are exact; so is every product. Memo tables are
shared between threads and guarded by a lock on insertion.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, reduce as fold
from itertools import product
from typing import Iterable, Mapping, Sequence

from sympy import Add, Matrix, Mul, Rational, Symbol, expand, ilcm
from sympy.parsing.sympy_parser import parse_expr

from .affine_weyl import FacetData, IwahoriWeylDatum, conjugate_node, omega_f_quotient
from .config import HeckeConfig
from .errors import ConsistencyError, InexactDivisionError, ParameterError, SpecFormatError
from .integer_modules import FinGenAbelianGroup, IntegerMatrix, Vector, add, dot, rational_solve, scale
from .laurent import LaurentScalar, default_symbols, from_sympy
from .root_datum import BasedRootDatum, dynkin_components, validate_and_classify, weyl_group_elements

log = logging.getLogger(__name__)

Key = tuple[Vector, int, int]


class Presentation(str, Enum):
    BERNSTEIN = "bernstein"
    IWAHORI_MATSUMOTO = "iwahori-matsumoto"


@dataclass(frozen=True)
class HeckeElement:
    nvars: int
    terms: tuple[tuple[Key, LaurentScalar], ...] = ()
    presentation: Presentation = Presentation.BERNSTEIN

    @classmethod
    def from_mapping(
        cls, nvars: int, mapping: Mapping[Key, LaurentScalar], presentation: Presentation = Presentation.BERNSTEIN
    ) -> "HeckeElement":
        items = tuple(sorted((k, c) for k, c in mapping.items() if not c.is_zero()))
        return cls(nvars, items, Presentation(presentation))

    def as_dict(self) -> dict[Key, LaurentScalar]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "HeckeElement") -> None:
        if self.presentation != other.presentation or self.nvars != other.nvars:
            raise ValueError("Hecke elements in different presentations or parameter counts")

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        self._check(other)
        out = self.as_dict()
        for k, c in other.terms:
            out[k] = out[k] + c if k in out else c
        return HeckeElement.from_mapping(self.nvars, out, self.presentation)

    def __neg__(self) -> "HeckeElement":
        return HeckeElement(self.nvars, tuple((k, -c) for k, c in self.terms), self.presentation)

    def __sub__(self, other: "HeckeElement") -> "HeckeElement":
        return self + (-other)

    def scale(self, c: LaurentScalar) -> "HeckeElement":
        return HeckeElement.from_mapping(self.nvars, {k: v * c for k, v in self.terms}, self.presentation)

    def specialize(self) -> dict[Key, int]:
        out = {k: c.specialize() for k, c in self.terms}
        return {k: c for k, c in out.items() if c}

    def to_dict(self) -> dict:
        return {
            "presentation": self.presentation.value,
            "terms": [
                {"x": list(x), "w": w, "omega": o, "coefficient": str(c)} for (x, w, o), c in self.terms
            ],
        }


@dataclass(frozen=True)
class AffineHeckeDatum:
    """Root datum R in X = ℤ^rank with labels λ, λ* on the simple roots."""

    root_datum: BasedRootDatum
    labels: tuple[int, ...]
    star_labels: tuple[int, ...]
    component_of: tuple[int, ...]
    nvars: int = 1
    omega_ext: tuple[IntegerMatrix, ...] = ()
    cocycle_trivial: bool = True
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, compare=False, repr=False)

    @property
    def rank(self) -> int:
        return self.root_datum.rank

    @property
    def simple_count(self) -> int:
        return len(self.root_datum.simple_indices)

    # -- Weyl group tables ---------------------------------------------

    @cached_property
    def weyl(self) -> list:
        return weyl_group_elements(self.root_datum)

    @cached_property
    def _perm_index(self) -> dict[tuple[int, ...], int]:
        return {w.perm: i for i, w in enumerate(self.weyl)}

    @cached_property
    def _matrix_index(self) -> dict[IntegerMatrix, int]:
        return {w.matrix: i for i, w in enumerate(self.weyl)}

    def weyl_mult(self, a: int, b: int) -> int:
        pa, pb = self.weyl[a].perm, self.weyl[b].perm
        return self._perm_index[tuple(pa[r] for r in pb)]

    def weyl_inverse(self, a: int) -> int:
        p = self.weyl[a].perm
        inv = [0] * len(p)
        for r, img in enumerate(p):
            inv[img] = r
        return self._perm_index[tuple(inv)]

    def weyl_length(self, a: int) -> int:
        return len(self.weyl[a].word)

    def weyl_act(self, a: int, x: Sequence[int]) -> Vector:
        return self.weyl[a].matrix.apply(x)

    @cached_property
    def simple_reflections(self) -> tuple[int, ...]:
        return tuple(self._simple_single(k) for k in range(self.simple_count))

    def _simple_single(self, k: int) -> int:
        D = self.root_datum
        return self._matrix_index[D.reflection_matrix(D.simple_indices[k])]

    def reflection_index(self, root: int) -> int:
        return self._matrix_index[self.root_datum.reflection_matrix(root)]

    def raises_length(self, w: int, k: int) -> bool:
        """ℓ(w s_k) > ℓ(w)."""
        D = self.root_datum
        return D.is_positive(self.weyl[w].perm[D.simple_indices[k]])

    # -- omega_ext -------------------------------------------------------

    @cached_property
    def omega(self) -> tuple[IntegerMatrix, ...]:
        return self.omega_ext or (IntegerMatrix.identity(self.rank),)

    @cached_property
    def _omega_index(self) -> dict[IntegerMatrix, int]:
        return {m: i for i, m in enumerate(self.omega)}

    def omega_mult(self, a: int, b: int) -> int:
        return self._omega_index[self.omega[a] @ self.omega[b]]

    def omega_act(self, o: int, x: Sequence[int]) -> Vector:
        return self.omega[o].apply(x) if o else tuple(x)

    def omega_conj(self, o: int, w: int) -> int:
        if not o:
            return w
        M = self.omega[o]
        return self._matrix_index[M @ self.weyl[w].matrix @ M.inverse()]

    # -- parameters -------------------------------------------------------

    def difference(self, k: int) -> LaurentScalar:
        return LaurentScalar.quantum_difference(self.component_of[k], self.labels[k], self.nvars)

    def star_difference(self, k: int) -> LaurentScalar:
        return LaurentScalar.quantum_difference(self.component_of[k], self.star_labels[k], self.nvars)

    @cached_property
    def conjugate_simple(self) -> dict[int, int]:
        """Root index → simple position it is W-conjugate to."""
        D = self.root_datum
        out: dict[int, int] = {}
        for w in self.weyl:
            for k, i in enumerate(D.simple_indices):
                out.setdefault(w.perm[i], k)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "root_datum": self.root_datum.to_dict(),
            "labels": list(self.labels),
            "star_labels": list(self.star_labels),
            "component_of": list(self.component_of),
            "nvars": self.nvars,
            "omega_ext_order": len(self.omega),
            "cocycle_trivial": self.cocycle_trivial,
        }

    def _memo(self, key, compute):
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = compute()
        with self._lock:
            self._cache.setdefault(key, value)
        return value


def hecke_datum(
    root_datum: BasedRootDatum,
    labels: Sequence[int],
    star_labels: Sequence[int] | None = None,
    component_of: Sequence[int] | None = None,
    nvars: int = 1,
    omega_ext: Iterable[IntegerMatrix] = (),
    name: str = "",
) -> AffineHeckeDatum:
    """Validate labels and the omega_ext action and build the datum."""
    validate_and_classify(root_datum)
    n = len(root_datum.simple_indices)
    labels = tuple(int(x) for x in labels)
    star = tuple(int(x) for x in (star_labels if star_labels is not None else labels))
    comp = tuple(int(x) for x in (component_of if component_of is not None else [0] * n))
    if not (len(labels) == len(star) == len(comp) == n):
        raise ParameterError("one label per simple root is required", witness={"simple_roots": n})
    if any(x < 0 for x in labels + star) or any(not 0 <= c < nvars for c in comp):
        raise ParameterError("labels must be nonnegative and parameter indices in range")
    for k, i in enumerate(root_datum.simple_indices):
        coroot = root_datum.coroots[i]
        if labels[k] != star[k] and any(x % 2 for x in coroot):
            raise ParameterError(
                "lambda and lambda* may differ only when the coroot lies in 2X^v",
                witness={"simple": k, "coroot": list(coroot)},
            )
    omegas = tuple(omega_ext)
    ident = IntegerMatrix.identity(root_datum.rank)
    if omegas and omegas[0] != ident:
        omegas = (ident,) + tuple(m for m in omegas if m != ident)
    D = AffineHeckeDatum(root_datum, labels, star, comp, nvars, omegas, True, name or root_datum.name)
    for k, i in enumerate(root_datum.simple_indices):
        for kk, ii in enumerate(root_datum.simple_indices):
            if any(D.weyl[w].perm[i] == ii for w in range(len(D.weyl))):
                if (labels[k], star[k], comp[k]) != (labels[kk], star[kk], comp[kk]):
                    raise ParameterError("labels differ on W-conjugate simple roots", witness={"simple": [k, kk]})
    simple = set(root_datum.simple_indices)
    for o, M in enumerate(D.omega):
        co = M.inverse().transpose()
        for k, i in enumerate(root_datum.simple_indices):
            j = root_datum.root_index.get(M.apply(root_datum.roots[i]))
            if j not in simple or root_datum.coroots[j] != co.apply(root_datum.coroots[i]):
                raise ParameterError("omega_ext does not preserve the simple roots", witness={"omega": M.to_list()})
            kk = root_datum.simple_indices.index(j)
            if (labels[k], star[k], comp[k]) != (labels[kk], star[kk], comp[kk]):
                raise ParameterError("omega_ext does not preserve the labels", witness={"omega": M.to_list()})
        for P in D.omega:
            if M @ P not in D._omega_index:
                raise ParameterError("omega_ext is not closed under products")
    return D


# -- basis elements ------------------------------------------------------------


def theta(D: AffineHeckeDatum, x: Sequence[int]) -> HeckeElement:
    return HeckeElement.from_mapping(D.nvars, {(tuple(x), 0, 0): LaurentScalar.one(D.nvars)})


def n_basis(D: AffineHeckeDatum, w: int) -> HeckeElement:
    return HeckeElement.from_mapping(D.nvars, {(tuple([0] * D.rank), w, 0): LaurentScalar.one(D.nvars)})


def n_word(D: AffineHeckeDatum, word: Sequence[int]) -> HeckeElement:
    """N_{s_{k1}} ⋯ N_{s_km} for simple positions k."""
    out = one(D)
    for k in word:
        out = multiply(D, out, n_basis(D, D.simple_reflections[k]))
    return out


def omega_basis(D: AffineHeckeDatum, o: int) -> HeckeElement:
    return HeckeElement.from_mapping(D.nvars, {(tuple([0] * D.rank), 0, o): LaurentScalar.one(D.nvars)})


def one(D: AffineHeckeDatum, presentation: Presentation = Presentation.BERNSTEIN) -> HeckeElement:
    return HeckeElement.from_mapping(D.nvars, {(tuple([0] * D.rank), 0, 0): LaurentScalar.one(D.nvars)}, presentation)


def scalar(D: AffineHeckeDatum, c: LaurentScalar, presentation: Presentation = Presentation.BERNSTEIN) -> HeckeElement:
    return one(D, presentation).scale(c)


# -- Bernstein multiplication ----------------------------------------------------


def _finite_product(D: AffineHeckeDatum, v: int, u: int) -> dict[int, LaurentScalar]:
    """N_v · N_u in the finite Hecke algebra."""

    def compute() -> dict[int, LaurentScalar]:
        if u == 0:
            return {v: LaurentScalar.one(D.nvars)}
        word = D.weyl[u].word
        k = word[-1]
        shorter = D.weyl_mult(u, D.simple_reflections[k])
        out: dict[int, LaurentScalar] = {}
        for t, f in _finite_product(D, v, shorter).items():
            ts = D.weyl_mult(t, D.simple_reflections[k])
            out[ts] = out[ts] + f if ts in out else f
            if not D.raises_length(t, k):
                extra = f * D.difference(k)
                out[t] = out[t] + extra if t in out else extra
        return {t: f for t, f in out.items() if not f.is_zero()}

    return D._memo(("finite", v, u), compute)


def _correction(D: AffineHeckeDatum, k: int, x: Vector) -> dict[Vector, LaurentScalar]:
    """((v^λ − v^{−λ}) + θ_{−α}(v^{λ*} − v^{−λ*}))(θ_x − θ_{s x}) / (1 − θ_{−2α}), by exact division."""

    def compute() -> dict[Vector, LaurentScalar]:
        R = D.root_datum
        i = R.simple_indices[k]
        alpha = R.roots[i]
        coroot = R.coroots[i]
        sx = R.reflect(i, x)
        if sx == tuple(x):
            return {}
        A, B = D.difference(k), D.star_difference(k)
        minus_alpha = tuple(-a for a in alpha)
        numerator: dict[Vector, LaurentScalar] = {}

        def bump(z: Vector, c: LaurentScalar) -> None:
            numerator[z] = numerator[z] + c if z in numerator else c
            if numerator[z].is_zero():
                del numerator[z]

        for z, sign in ((tuple(x), 1), (sx, -1)):
            bump(z, A * sign)
            bump(add(z, minus_alpha), B * sign)
        floor = min(dot(z, coroot) for z in numerator) if numerator else 0
        quotient: dict[Vector, LaurentScalar] = {}
        shift = scale(-2, alpha)
        while numerator:
            top = max(numerator, key=lambda z: (dot(z, coroot), z))
            if dot(top, coroot) < floor:
                raise InexactDivisionError(
                    "cross relation correction is not a polynomial",
                    witness={"x": list(x), "alpha": list(alpha)},
                )
            c = numerator[top]
            quotient[top] = quotient[top] + c if top in quotient else c
            bump(top, -c)
            bump(add(top, shift), c)
        return {z: c for z, c in quotient.items() if not c.is_zero()}

    return D._memo(("blz", k, tuple(x)), compute)


def _commute(D: AffineHeckeDatum, w: int, y: Vector) -> dict[tuple[Vector, int], LaurentScalar]:
    """N_w · θ_y written as Σ c θ_z N_v."""

    def compute() -> dict[tuple[Vector, int], LaurentScalar]:
        if w == 0:
            return {(tuple(y), 0): LaurentScalar.one(D.nvars)}
        k = D.weyl[w].word[0]
        s = D.simple_reflections[k]
        rest = D.weyl_mult(s, w)
        out: dict[tuple[Vector, int], LaurentScalar] = {}

        def bump(key, c: LaurentScalar) -> None:
            out[key] = out[key] + c if key in out else c

        i = D.root_datum.simple_indices[k]
        for (z, v), e in _commute(D, rest, y).items():
            sz = D.root_datum.reflect(i, z)
            for t, f in _finite_product(D, s, v).items():
                bump((sz, t), e * f)
            for xz, g in _correction(D, k, sz).items():
                bump((xz, v), -(e * g))
        return {key: c for key, c in out.items() if not c.is_zero()}

    return D._memo(("commute", w, tuple(y)), compute)


def multiply(D: AffineHeckeDatum, a: HeckeElement, b: HeckeElement) -> HeckeElement:
    """Exact product in the Bernstein presentation."""
    if a.presentation is not Presentation.BERNSTEIN or b.presentation is not Presentation.BERNSTEIN:
        raise ValueError("multiply works on Bernstein elements; use im_multiply for Iwahori-Matsumoto ones")
    out: dict[Key, LaurentScalar] = {}
    for (x, w, o), c in a.terms:
        for (y, u, o2), d in b.terms:
            y1 = D.omega_act(o, y)
            u1 = D.omega_conj(o, u)
            o3 = D.omega_mult(o, o2)
            cd = c * d
            for (z, v), e in _commute(D, w, y1).items():
                cde = cd * e
                xz = add(x, z)
                for t, f in _finite_product(D, v, u1).items():
                    key = (xz, t, o3)
                    term = cde * f
                    out[key] = out[key] + term if key in out else term
    return HeckeElement.from_mapping(D.nvars, out)


def power(D: AffineHeckeDatum, a: HeckeElement, k: int) -> HeckeElement:
    out = one(D, a.presentation)
    mult = multiply if a.presentation is Presentation.BERNSTEIN else im_multiply
    for _ in range(k):
        out = mult(D, out, a)
    return out


def n_inverse(D: AffineHeckeDatum, w: int) -> HeckeElement:
    """N_w^{-1} = N_{s_km}^{-1} ⋯ N_{s_k1}^{-1}, with N_s^{-1} = N_s − (v^λ − v^{−λ})."""
    out = one(D)
    for k in reversed(D.weyl[w].word):
        inv = n_basis(D, D.simple_reflections[k]) - scalar(D, D.difference(k))
        out = multiply(D, out, inv)
    return out


# -- center, orbit sums, braid relations ------------------------------------------------


def _generators(D: AffineHeckeDatum) -> list[tuple[str, HeckeElement]]:
    gens = [(f"N({k + 1})", n_basis(D, D.simple_reflections[k])) for k in range(D.simple_count)]
    for j in range(D.rank):
        e = tuple(1 if i == j else 0 for i in range(D.rank))
        gens.append((f"th({','.join(str(c) for c in e)})", theta(D, e)))
    gens += [(f"om({o})", omega_basis(D, o)) for o in range(1, len(D.omega))]
    return gens


def central_test(D: AffineHeckeDatum, e: HeckeElement) -> tuple[bool, str | None]:
    """Whether e commutes with every generator; otherwise the first generator that fails."""
    for name, g in _generators(D):
        if multiply(D, e, g) != multiply(D, g, e):
            return False, name
    return True, None


def orbit_symmetrize(D: AffineHeckeDatum, x: Sequence[int]) -> HeckeElement:
    """Σ θ_y over the (W ⋊ omega_ext)-orbit of x; central by Bernstein's description of the center."""
    orbit = set()
    for o in range(len(D.omega)):
        ox = D.omega_act(o, x)
        for w in range(len(D.weyl)):
            orbit.add(D.weyl_act(w, ox))
    total = HeckeElement.from_mapping(D.nvars, {(y, 0, 0): LaurentScalar.one(D.nvars) for y in orbit})
    ok, witness = central_test(D, total)
    if not ok:
        raise ConsistencyError("orbit sum is not central", witness={"x": list(x), "generator": witness})
    return total


def braid_check(D: AffineHeckeDatum) -> dict[str, bool]:
    """Both alternating words of length m_ij give the same N-product."""
    C = D.root_datum.cartan_matrix()
    orders = {0: 2, 1: 3, 2: 4, 3: 6}
    out = {}
    for i in range(D.simple_count):
        for j in range(i + 1, D.simple_count):
            m = orders.get(C.entries[i][j] * C.entries[j][i])
            if m is None:
                continue
            left = n_word(D, [i if t % 2 == 0 else j for t in range(m)])
            right = n_word(D, [j if t % 2 == 0 else i for t in range(m)])
            out[f"{i + 1},{j + 1}"] = left == right
    return out


def specialize_structure_constants(D: AffineHeckeDatum, xs: Iterable[Sequence[int]]) -> tuple[bool, dict | None]:
    """At v = 1 the products of basis elements are those of the group algebra of W ⋉ X ⋊ omega_ext."""
    basis = [(tuple(x), w, o) for x in xs for w in range(len(D.weyl)) for o in range(len(D.omega))]
    for (x, w, o) in basis:
        for (y, u, o2) in basis:
            a = HeckeElement.from_mapping(D.nvars, {(x, w, o): LaurentScalar.one(D.nvars)})
            b = HeckeElement.from_mapping(D.nvars, {(y, u, o2): LaurentScalar.one(D.nvars)})
            got = multiply(D, a, b).specialize()
            y1 = D.omega_act(o, y)
            u1 = D.omega_conj(o, u)
            expected = {(add(x, D.weyl_act(w, y1)), D.weyl_mult(w, u1), D.omega_mult(o, o2)): 1}
            if got != expected:
                return False, {"left": [list(x), w, o], "right": [list(y), u, o2]}
    return True, None


# -- Iwahori–Matsumoto presentation ----------------------------------------------------------


@dataclass(frozen=True)
class AffineGenerator:
    label: int
    translation: Vector
    linear: int
    root: int
    is_affine: bool


def _alcove(D: AffineHeckeDatum) -> tuple[Vector, int, list[AffineGenerator]]:
    def compute():
        R = D.root_datum
        simple = list(R.simple_indices)
        r = len(simple)
        C = R.cartan_matrix()
        comps = _components(C)
        gens: list[AffineGenerator] = []
        eps: list[Rational] = [Rational(0)] * r
        for c, comp in enumerate(comps):
            best = None
            for ridx in R.positive_indices:
                coeffs = rational_solve([R.coroots[i] for i in simple], R.coroots[ridx])
                if any(coeffs[k] != 0 for k in range(r) if k not in comp):
                    continue
                h = sum(coeffs)
                if best is None or (h, R.roots[ridx]) > best[0]:
                    best = ((h, R.roots[ridx]), ridx)
            (h, _), beta = best
            for k in comp:
                eps[k] = Rational(1, int(h) + 1)
            gens.append(AffineGenerator(0 if c == 0 else r + c, R.roots[beta], D.reflection_index(beta), beta, True))
        for k in range(r):
            gens.append(AffineGenerator(k + 1, tuple([0] * D.rank), D.simple_reflections[k], simple[k], False))
        gens.sort(key=lambda g: g.label)
        if r:
            y = Matrix(C.to_list()).solve(Matrix(eps))
            point = [Rational(0)] * D.rank
            for k in range(r):
                for t in range(D.rank):
                    point[t] += y[k] * R.roots[simple[k]][t]
            denom = fold(ilcm, [p.q for p in point], 1)
            return tuple(int(p * denom) for p in point), denom, gens
        return tuple([0] * D.rank), 1, gens

    return D._memo(("alcove",), compute)


def _components(C: IntegerMatrix) -> list[tuple[int, ...]]:
    return dynkin_components(C) if C.rows else []


def _group_compose(D: AffineHeckeDatum, g: tuple[Vector, int], h: tuple[Vector, int]) -> tuple[Vector, int]:
    return add(g[0], D.weyl_act(g[1], h[0])), D.weyl_mult(g[1], h[1])


def _group_inverse(D: AffineHeckeDatum, g: tuple[Vector, int]) -> tuple[Vector, int]:
    winv = D.weyl_inverse(g[1])
    return tuple(-c for c in D.weyl_act(winv, g[0])), winv


def _scaled(D: AffineHeckeDatum, g: tuple[Vector, int]) -> Vector:
    point, denom, _ = _alcove(D)
    moved = D.weyl_act(g[1], point)
    return tuple(m + denom * t for m, t in zip(moved, g[0]))


def im_length(D: AffineHeckeDatum, g: tuple[Vector, int]) -> int:
    R = D.root_datum
    _, denom, _ = _alcove(D)
    q = _scaled(D, g)
    return sum(abs(dot(q, R.coroots[i]) // denom) for i in R.positive_indices)


def _left_descent(D: AffineHeckeDatum, g: tuple[Vector, int]) -> AffineGenerator | None:
    R = D.root_datum
    _, denom, gens = _alcove(D)
    q = _scaled(D, g)
    for a in gens:
        value = dot(q, R.coroots[a.root])
        if (a.is_affine and value > denom) or (not a.is_affine and value < 0):
            return a
    return None


def im_decompose(D: AffineHeckeDatum, g: tuple[Vector, int]) -> tuple[tuple[AffineGenerator, ...], tuple[Vector, int]]:
    """g = s_{a1} ⋯ s_{ak} · ω with ℓ(ω) = 0."""

    def compute():
        word = []
        cur = g
        while True:
            a = _left_descent(D, cur)
            if a is None:
                return tuple(word), cur
            word.append(a)
            cur = _group_compose(D, (a.translation, a.linear), cur)

    return D._memo(("decompose", g), compute)


def _generator_parameter(D: AffineHeckeDatum, a: AffineGenerator) -> LaurentScalar:
    if not a.is_affine:
        return D.difference(a.label - 1)
    k = D.conjugate_simple[a.root]
    return D.star_difference(k)


def _im_right_simple(D: AffineHeckeDatum, terms: dict, a: AffineGenerator) -> dict:
    s = (a.translation, a.linear)
    out: dict = {}
    for g, f in terms.items():
        gs = _group_compose(D, g, s)
        out[gs] = out[gs] + f if gs in out else f
        if im_length(D, gs) < im_length(D, g):
            extra = f * _generator_parameter(D, a)
            out[g] = out[g] + extra if g in out else extra
    return {g: f for g, f in out.items() if not f.is_zero()}


def im_basis(D: AffineHeckeDatum, x: Sequence[int], w: int = 0, o: int = 0) -> HeckeElement:
    return HeckeElement.from_mapping(D.nvars, {(tuple(x), w, o): LaurentScalar.one(D.nvars)}, Presentation.IWAHORI_MATSUMOTO)


def im_multiply(D: AffineHeckeDatum, a: HeckeElement, b: HeckeElement) -> HeckeElement:
    """Exact product in the Iwahori–Matsumoto presentation."""
    if a.presentation is not Presentation.IWAHORI_MATSUMOTO or b.presentation is not Presentation.IWAHORI_MATSUMOTO:
        raise ValueError("im_multiply works on Iwahori-Matsumoto elements")
    out: dict[Key, LaurentScalar] = {}
    for (x, w, o), c in a.terms:
        for (y, u, o2), d in b.terms:
            h = (D.omega_act(o, y), D.omega_conj(o, u))
            word, om = im_decompose(D, h)
            cur = {(tuple(x), w): c * d}
            for gen in word:
                cur = _im_right_simple(D, cur, gen)
            o3 = D.omega_mult(o, o2)
            for g, f in cur.items():
                gx, gw = _group_compose(D, g, om)
                key = (gx, gw, o3)
                out[key] = out[key] + f if key in out else f
    return HeckeElement.from_mapping(D.nvars, out, Presentation.IWAHORI_MATSUMOTO)


def im_inverse(D: AffineHeckeDatum, g: tuple[Vector, int]) -> HeckeElement:
    word, om = im_decompose(D, g)
    out = im_basis(D, *_group_inverse(D, om))
    for a in reversed(word):
        t = im_basis(D, a.translation, a.linear) - one(D, Presentation.IWAHORI_MATSUMOTO).scale(_generator_parameter(D, a))
        out = im_multiply(D, out, t)
    return out


def im_bar(D: AffineHeckeDatum, e: HeckeElement) -> HeckeElement:
    """Bar involution: v ↦ v^{-1}, T_g ↦ T_{g^{-1}}^{-1}."""
    total = HeckeElement.from_mapping(D.nvars, {}, Presentation.IWAHORI_MATSUMOTO)
    for (x, w, o), c in e.terms:
        inv = im_multiply(D, im_inverse(D, _group_inverse(D, (x, w))), im_basis(D, [0] * D.rank, 0, o))
        total = total + inv.scale(c.bar())
    return total


def _rho2(D: AffineHeckeDatum) -> Vector:
    R = D.root_datum
    out = tuple([0] * D.rank)
    for i in R.positive_indices:
        out = add(out, R.roots[i])
    return out


def _dominant_shift(D: AffineHeckeDatum, x: Sequence[int], minimum: int) -> int:
    """Smallest k ≥ 0 with ⟨x + k·2ρ, α_i∨⟩ ≥ minimum for every simple coroot."""
    R = D.root_datum
    k = 0
    for i in R.simple_indices:
        deficit = minimum - dot(x, R.coroots[i])
        if deficit > 0:
            k = max(k, -(-deficit // 2))
    return k


def theta_to_im(D: AffineHeckeDatum, x: Sequence[int], extra: int = 0) -> HeckeElement:
    """θ_x = T_{t_{x₊}} · T_{t_{x₋}}^{-1} with x₋ a multiple of the sum of positive roots."""
    k = _dominant_shift(D, x, 0) + extra
    minus = scale(k, _rho2(D))
    plus = add(x, minus)
    return im_multiply(D, im_basis(D, plus), im_inverse(D, (minus, 0)))


def to_iwahori_matsumoto(D: AffineHeckeDatum, e: HeckeElement) -> HeckeElement:
    if e.presentation is Presentation.IWAHORI_MATSUMOTO:
        return e
    total = HeckeElement.from_mapping(D.nvars, {}, Presentation.IWAHORI_MATSUMOTO)
    zero = [0] * D.rank
    for (x, w, o), c in e.terms:
        part = im_multiply(D, theta_to_im(D, x), im_basis(D, zero, w, o))
        total = total + part.scale(c)
    return total


def _im_generator_to_bernstein(D: AffineHeckeDatum, a: AffineGenerator) -> HeckeElement:
    if not a.is_affine:
        return n_basis(D, a.linear)
    s_beta = a.linear
    if im_length(D, (a.translation, 0)) != 1 + D.weyl_length(s_beta):
        raise ConsistencyError("t_beta = s_0 s_beta is not length additive", witness={"beta": list(a.translation)})
    return multiply(D, theta(D, a.translation), n_inverse(D, s_beta))


def _length_zero_to_bernstein(D: AffineHeckeDatum, g: tuple[Vector, int]) -> HeckeElement:
    y, u = g
    k = _dominant_shift(D, y, 1) if D.simple_count else 0
    shift = scale(k, _rho2(D))
    yd = add(y, shift)
    lt = im_length(D, (yd, 0))
    lg = im_length(D, (yd, u))
    if lg == lt + D.weyl_length(u):
        body = multiply(D, theta(D, yd), n_basis(D, u))
    elif lg == lt - D.weyl_length(u):
        body = multiply(D, theta(D, yd), n_inverse(D, D.weyl_inverse(u)))
    else:
        raise ConsistencyError("translation by a regular dominant element is neither additive nor subtractive", witness={"y": list(yd), "w": u})
    return multiply(D, theta(D, tuple(-c for c in shift)), body)


def to_bernstein(D: AffineHeckeDatum, e: HeckeElement) -> HeckeElement:
    if e.presentation is Presentation.BERNSTEIN:
        return e
    total = HeckeElement.from_mapping(D.nvars, {})
    for (x, w, o), c in e.terms:
        word, om = im_decompose(D, (tuple(x), w))
        part = one(D)
        for a in word:
            part = multiply(D, part, _im_generator_to_bernstein(D, a))
        part = multiply(D, part, _length_zero_to_bernstein(D, om))
        part = multiply(D, part, omega_basis(D, o))
        total = total + part.scale(c)
    return total


def im_bernstein_convert(D: AffineHeckeDatum, e: HeckeElement, direction: Presentation | str) -> HeckeElement:
    """Convert ``e`` into the presentation named by ``direction``."""
    target = Presentation(direction)
    return to_bernstein(D, e) if target is Presentation.BERNSTEIN else to_iwahori_matsumoto(D, e)


# -- twists ---------------------------------------------------------------------


@dataclass(frozen=True)
class UnitCharacter:
    """x ↦ ζ_order^{⟨exponents, x⟩}."""

    order: int
    exponents: tuple[int, ...]

    def value(self, x: Sequence[int]) -> int:
        return dot(self.exponents, x) % self.order if self.order > 1 else 0

    def compose(self, other: "UnitCharacter") -> "UnitCharacter":
        n = int(ilcm(self.order, other.order))
        a = tuple((p * (n // self.order) + q * (n // other.order)) % n for p, q in zip(self.exponents, other.exponents))
        return UnitCharacter(n, a)

    def is_trivial(self) -> bool:
        return all(x % self.order == 0 for x in self.exponents)

    def to_dict(self) -> dict:
        return {"order": self.order, "exponents": list(self.exponents)}


@dataclass(frozen=True)
class TwistAutomorphism:
    character: UnitCharacter
    checked_products: int

    def apply(self, e: HeckeElement) -> dict[Key, tuple[int, LaurentScalar]]:
        """θ_x N_w ω ↦ z(x) θ_x N_w ω; coefficients come back as (power of ζ, scalar)."""
        return {k: (self.character.value(k[0]), c) for k, c in e.terms}


def twist_by_character(D: AffineHeckeDatum, z: UnitCharacter, config: HeckeConfig | None = None) -> TwistAutomorphism:
    """The twist θ_x N_w ↦ z(x) θ_x N_w, checked multiplicative on degree ≤ 2 products."""
    cfg = config or HeckeConfig()
    if len(z.exponents) != D.rank:
        raise ValueError(f"character needs {D.rank} exponents")
    words = [0] + list(D.simple_reflections)
    samples = [(tuple(x), w) for x in product(range(-1, 2), repeat=D.rank) for w in words][: cfg.sample_size]
    checked = 0
    for x, w in samples:
        for y, u in samples:
            a = HeckeElement.from_mapping(D.nvars, {(x, w, 0): LaurentScalar.one(D.nvars)})
            b = HeckeElement.from_mapping(D.nvars, {(y, u, 0): LaurentScalar.one(D.nvars)})
            expected = (z.value(x) + z.value(y)) % z.order if z.order > 1 else 0
            for (xz, _, _), _c in multiply(D, a, b).terms:
                if z.value(xz) != expected:
                    raise ConsistencyError(
                        "twist is not multiplicative",
                        witness={"left": [list(x), w], "right": [list(y), u], "term": list(xz)},
                    )
            checked += 1
    log.debug("twist by %s verified on %d products", z, checked)
    return TwistAutomorphism(z, checked)


# -- facet-built data -------------------------------------------------------------


@dataclass(frozen=True)
class FacetHecke:
    facet: FacetData
    exponents: tuple[tuple[int, int], ...]
    data: tuple[tuple[tuple[int, ...], AffineHeckeDatum], ...]
    omega_f: FinGenAbelianGroup
    psi_elements: tuple[tuple[int, ...], ...]

    @property
    def datum(self) -> AffineHeckeDatum:
        return self.data[0][1]

    @property
    def psi_labels(self) -> tuple[tuple[int, ...], ...]:
        return tuple(lab for lab, _ in self.data)

    def to_dict(self) -> dict:
        return {
            "J": list(self.facet.J),
            "exponents": {str(k): v for k, v in self.exponents},
            "datum": self.datum.to_dict(),
            "psi_labels": [list(p) for p in self.psi_labels],
            "omega_f": self.omega_f.to_dict(),
        }


def default_exponents(D: IwahoriWeylDatum, f: FacetData) -> dict[int, int]:
    """Iwahori exponents: the multiplicity of the relative root of each node.

    A wall of 2a with a also a root carries m(a) + m(2a) when its constant is
    even (both vanish there) and m(a) − m(2a) when it is odd.
    """
    if f.J:
        raise ParameterError("only the Iwahori facet has built-in exponents", witness={"J": list(f.J)})
    rel = D.relative_roots
    out = {}
    for lab, _ in f.S_f_af:
        node = D.node(lab)
        grad = node.gradient if not node.is_affine else tuple(-x for x in node.gradient)
        half = tuple(x // 2 for x in grad)
        if all(x % 2 == 0 for x in grad) and rel.multiplicity(half):
            big, small = rel.multiplicity(half), rel.multiplicity(grad)
            out[lab] = big + small if node.constant % 2 == 0 else big - small
        else:
            out[lab] = rel.multiplicity(grad) or 1
    return out


def character_labels(D: IwahoriWeylDatum, elements: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Irreducible characters of a finite subgroup of Ω, as value tuples (numerators over the exponent)."""
    moduli = D.omega_cokernel.moduli
    torsion = [d for d in moduli if d]
    L = fold(ilcm, torsion, 1)
    ranges = [range(d) if d else range(1) for d in moduli]
    seen = []
    for a in product(*ranges):
        values = tuple(
            sum(ak * ck * (L // d) for ak, ck, d in zip(a, c, moduli) if d) % L if L > 1 else 0 for c in elements
        )
        if values not in seen:
            seen.append(values)
    return sorted(seen)


def build_from_facet(
    D: IwahoriWeylDatum,
    f: FacetData,
    exponents: Mapping[int, int] | None = None,
    config: HeckeConfig | None = None,
) -> FacetHecke:
    """Affine Hecke data of a completed facet: one datum per character ψ of Ω_{f,tor}."""
    cfg = config or HeckeConfig()
    if f.Rf is None:
        raise ValueError("facet_root_datum must run before build_from_facet")
    N = dict(exponents) if exponents is not None else default_exponents(D, f)
    gens = dict(f.S_f_af)
    missing = [lab for lab in gens if lab not in N]
    if missing:
        raise ParameterError("parameter table has no exponent for these nodes", witness={"J": list(f.J), "missing": missing})
    for cls in f.Omega_f:
        perm = D.node_permutation(D.omega_element(cls))
        for lab in gens:
            if N[perm[lab]] != N[lab]:
                raise ParameterError("exponents are not constant on Omega_f-orbits", witness={"node": lab, "image": perm[lab]})
    parallel = dict(f.parallel_reflections)
    labels = []
    stars = []
    for p, lab in enumerate(f.S_f):
        labels.append(N[lab])
        partner = conjugate_node(D, f, parallel[lab], cfg.translation_radius)
        if partner is None:
            raise ConsistencyError("parallel reflection is not conjugate to a generator", witness={"node": lab})
        stars.append(N[partner])
    Rf = f.Rf
    datum = hecke_datum(Rf, labels, stars, name=Rf.name)
    psi_elements = tuple(sorted(tuple(t) for t in f.Omega_f_tor)) or (tuple(0 for _ in D.omega_cokernel.moduli),)
    chars = character_labels(D, psi_elements)
    if len(chars) != len(psi_elements):
        raise ConsistencyError("character count differs from |Omega_f_tor|", witness={"characters": len(chars)})
    log.info("facet J=%s gives %d Hecke data with labels %s / %s", list(f.J), len(chars), labels, stars)
    return FacetHecke(
        facet=f,
        exponents=tuple(sorted(N.items())),
        data=tuple((psi, datum) for psi in chars),
        omega_f=omega_f_quotient(D, f),
        psi_elements=psi_elements,
    )


# -- text format ---------------------------------------------------------------------


def parse_element(D: AffineHeckeDatum, text: str, presentation: Presentation | str = Presentation.BERNSTEIN) -> HeckeElement:
    """Parse sums of products of th(x...), N(k...), om(k) and Laurent scalars in v (or v0, v1, ...).

    N takes 1-based simple positions. In the Iwahori–Matsumoto presentation
    th(x...) stands for T_{t_x}.
    """
    presentation = Presentation(presentation)
    names = default_symbols(D.nvars)
    atoms: dict[Symbol, HeckeElement] = {}

    def register(prefix: str, element: HeckeElement, args) -> Symbol:
        sym = Symbol(f"{prefix}[{','.join(str(a) for a in args)}]", commutative=False)
        atoms[sym] = element
        return sym

    def th(*xs):
        x = tuple(int(a) for a in xs)
        if len(x) != D.rank:
            raise SpecFormatError(f"th() needs {D.rank} coordinates")
        el = theta(D, x) if presentation is Presentation.BERNSTEIN else im_basis(D, x)
        return register("th", el, x)

    def n(*ks):
        word = [int(k) - 1 for k in ks]
        if any(not 0 <= k < D.simple_count for k in word):
            raise SpecFormatError(f"N() positions run from 1 to {D.simple_count}")
        if presentation is Presentation.BERNSTEIN:
            el = n_word(D, word)
        else:
            el = one(D, presentation)
            for k in word:
                el = im_multiply(D, el, im_basis(D, [0] * D.rank, D.simple_reflections[k]))
        return register("N", el, ks)

    def om(k):
        k = int(k)
        if not 0 <= k < len(D.omega):
            raise SpecFormatError(f"om() index runs from 0 to {len(D.omega) - 1}")
        el = omega_basis(D, k) if presentation is Presentation.BERNSTEIN else im_basis(D, [0] * D.rank, 0, k)
        return register("om", el, (k,))

    local = {str(s): s for s in names}
    local.update({"th": th, "N": n, "om": om})
    try:
        expr = expand(parse_expr(text, local_dict=local, evaluate=True))
    except SpecFormatError:
        raise
    except Exception as exc:
        raise SpecFormatError(f"cannot parse Hecke element {text!r}: {exc}") from exc
    mult = multiply if presentation is Presentation.BERNSTEIN else im_multiply
    total = HeckeElement.from_mapping(D.nvars, {}, presentation)
    for term in Add.make_args(expr) if expr != 0 else ():
        commutative, noncommutative = term.args_cnc()
        coeff = from_sympy(Mul(*commutative), names)
        part = one(D, presentation)
        for factor in noncommutative:
            base, exp = factor.as_base_exp()
            if base not in atoms or not exp.is_integer or exp < 0:
                raise SpecFormatError(f"unsupported factor {factor}")
            for _ in range(int(exp)):
                part = mult(D, part, atoms[base])
        total = total + part.scale(coeff)
    return total


def format_element(D: AffineHeckeDatum, e: HeckeElement) -> str:
    """Bernstein terms print as th(x)*N(word)*om(k); Iwahori–Matsumoto terms as T(x;word)*om(k)."""
    if e.is_zero():
        return "0"
    pieces = []
    for (x, w, o), c in e.terms:
        factors = []
        word = D.weyl[w].word
        if e.presentation is Presentation.IWAHORI_MATSUMOTO:
            if any(x) or word:
                factors.append(f"T({','.join(str(a) for a in x)};{','.join(str(k + 1) for k in word)})")
        else:
            if any(x):
                factors.append(f"th({','.join(str(a) for a in x)})")
            if word:
                factors.append(f"N({','.join(str(k + 1) for k in word)})")
        if o:
            factors.append(f"om({o})")
        body = "*".join(factors) if factors else "1"
        pieces.append(f"({c})*{body}")
    return " + ".join(pieces)
