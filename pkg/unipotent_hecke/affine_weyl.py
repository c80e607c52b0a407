#!/usr/bin/env python3
"""Iwahori–Weyl groups, the fundamental alcove, Ω, and facet combinatorics.

Elements are pairs (translation in Λ, index into the finite Weyl group W₀).
Λ is kept in the canonical coordinates of its Smith form; the apartment V
uses the coordinates of the fixed-coweight basis of X_*(S). Points of V are
tuples of sympy Rationals; lengths are computed from an integer multiple of a
generic point of the fundamental alcove, so no floating point is involved.

Walls come from the non-multipliable relative roots: when a and 2a are both
roots, the walls are 2a + ℤ (the affine roots a + ½ℤ and 2a + 2ℤ), so the
origin is a hyperspecial vertex.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass, field, replace
from functools import reduce as fold
from itertools import product
from typing import Iterable, Sequence

from sympy import Matrix, Rational, ilcm, igcd

from .config import HeckeConfig
from .errors import (
    AffineModelError,
    ConsistencyError,
    EnumerationCapExceeded,
    FacetConstructionError,
    ReconstructionError,
)
from .galois_relative import (
    AnisotropicMarking,
    GaloisDatum,
    RelativeRootSystem,
    RelativeWeylGroup,
    WeylPath,
    check_marking,
    relative_weyl_group,
    restricted_root_system,
)
from .integer_modules import (
    Cokernel,
    FinGenAbelianGroup,
    FixedQuotient,
    IntegerMatrix,
    Vector,
    cokernel,
    dot,
    fixed_quotient,
    lattice_basis,
    rational_solve,
    solve_integer,
)
from .levi_dual import LeviClass, levi_class_of_relative
from .root_datum import BasedRootDatum, dynkin_components, validate_and_classify, weyl_group_elements

log = logging.getLogger(__name__)

QVector = tuple[Rational, ...]


@dataclass(frozen=True, order=True)
class AffineWeylElement:
    translation: tuple[int, ...]
    linear: int


@dataclass(frozen=True)
class AffineSimpleRoot:
    label: int
    gradient: Vector
    constant: int
    component: int
    is_affine: bool

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "gradient": list(self.gradient),
            "constant": self.constant,
            "component": self.component,
            "affine": self.is_affine,
        }


def _qvec(v: Iterable) -> QVector:
    return tuple(Rational(x) for x in v)


def _qdot(a: Sequence, x: Sequence) -> Rational:
    return sum((Rational(ai) * xi for ai, xi in zip(a, x)), Rational(0))


def _qapply(M: IntegerMatrix, x: Sequence) -> QVector:
    return tuple(sum((Rational(m) * xi for m, xi in zip(row, x)), Rational(0)) for row in M.entries)


def _is_integral(v: Sequence) -> bool:
    return all(Rational(x).is_integer for x in v)


def rational_lattice_basis(vectors: Sequence[Sequence], dim: int) -> list[QVector]:
    """Basis of the ℤ-span of rational vectors."""
    vecs = [_qvec(v) for v in vectors]
    if not vecs:
        return []
    den = fold(ilcm, [x.q for v in vecs for x in v], 1)
    scaled = [tuple(int(x * den) for x in v) for v in vecs]
    return [tuple(Rational(x, den) for x in b) for b in lattice_basis(scaled, dim)]


@dataclass(frozen=True)
class IwahoriWeylDatum:
    galois: GaloisDatum
    marking: AnisotropicMarking
    lattice: FixedQuotient
    translations: FinGenAbelianGroup
    finite_weyl: RelativeWeylGroup
    relative_roots: RelativeRootSystem
    simple_gradients: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    coroots: dict = field(repr=False)
    reflection_index: dict = field(repr=False)
    nodes: tuple[AffineSimpleRoot, ...]
    lattice_action: tuple[IntegerMatrix, ...] = field(repr=False)
    product_table: tuple[tuple[int, ...], ...] = field(repr=False)
    inverse_table: tuple[int, ...] = field(repr=False)
    nu_columns: tuple[Vector, ...] = field(repr=False)
    alcove_point: Vector = field(repr=False)
    alcove_scale: int = field(repr=False)
    omega_cokernel: Cokernel = field(repr=False)
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, compare=False, repr=False)

    # -- basic structure ----------------------------------------------

    @property
    def rank(self) -> int:
        """Dimension of the apartment V."""
        return self.relative_roots.rank

    @property
    def identity(self) -> AffineWeylElement:
        return AffineWeylElement(tuple(0 for _ in self.lattice.quotient.moduli), 0)

    @property
    def omega(self) -> FinGenAbelianGroup:
        return self.omega_cokernel.group

    @property
    def node_labels(self) -> tuple[int, ...]:
        return tuple(n.label for n in self.nodes)

    def node(self, label: int) -> AffineSimpleRoot:
        for n in self.nodes:
            if n.label == label:
                return n
        raise ValueError(f"no affine simple root labelled {label}; labels are {list(self.node_labels)}")

    def components(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for n in self.nodes:
            out.setdefault(n.component, []).append(n.label)
        return {c: tuple(v) for c, v in out.items()}

    def linear_matrix(self, w: int) -> IntegerMatrix:
        """Action of W₀ element ``w`` on V."""
        return self.finite_weyl.coelements[w]

    # -- group law ----------------------------------------------------

    def _lambda_reduce(self, lf: Sequence[int]) -> tuple[int, ...]:
        return self.lattice.quotient.reduce(lf)

    def act_on_lattice(self, w: int, c: Sequence[int]) -> tuple[int, ...]:
        lf = self.lattice.quotient.lift(c)
        return self._lambda_reduce(self.lattice_action[w].apply(lf))

    def compose(self, g: AffineWeylElement, h: AffineWeylElement) -> AffineWeylElement:
        moved = self.act_on_lattice(g.linear, h.translation)
        lf = [a + b for a, b in zip(self.lattice.quotient.lift(g.translation), self.lattice.quotient.lift(moved))]
        return AffineWeylElement(self._lambda_reduce(lf), self.product_table[g.linear][h.linear])

    def inverse(self, g: AffineWeylElement) -> AffineWeylElement:
        winv = self.inverse_table[g.linear]
        moved = self.act_on_lattice(winv, g.translation)
        return AffineWeylElement(self._lambda_reduce([-x for x in self.lattice.quotient.lift(moved)]), winv)

    def multiply(self, *elements: AffineWeylElement) -> AffineWeylElement:
        out = self.identity
        for e in elements:
            out = self.compose(out, e)
        return out

    def translation_element(self, v: Sequence[int]) -> AffineWeylElement:
        """t_v for an integral vector v of V lying in ν(Λ)."""
        return AffineWeylElement(self.lambda_of_vector(v), 0)

    def lambda_of_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        ambient = [0] * self.galois.base.rank
        for k, b in zip(v, self.relative_roots.basis):
            for i in range(len(ambient)):
                ambient[i] += int(k) * b[i]
        if not self.lattice.basis:
            return ()
        coords = solve_integer(IntegerMatrix.from_columns(self.lattice.basis, self.galois.base.rank), ambient)
        if coords is None:
            raise ValueError(f"{list(v)} is not a translation of the Iwahori–Weyl group")
        return self._lambda_reduce(coords)

    def nu(self, c: Sequence[int]) -> Vector:
        """Image in V of an element of Λ (torsion maps to 0)."""
        lf = self.lattice.quotient.lift(c)
        return tuple(sum(col[i] * x for col, x in zip(self.nu_columns, lf)) for i in range(self.rank))

    def act(self, g: AffineWeylElement, x: Sequence) -> QVector:
        moved = _qapply(self.linear_matrix(g.linear), x)
        return tuple(m + t for m, t in zip(moved, self.nu(g.translation)))

    def linear_part_element(self, w: int) -> AffineWeylElement:
        return AffineWeylElement(self.identity.translation, w)

    # -- alcove geometry ----------------------------------------------

    def _scaled_point(self, g: AffineWeylElement) -> Vector:
        moved = self.linear_matrix(g.linear).apply(self.alcove_point)
        return tuple(m + self.alcove_scale * t for m, t in zip(moved, self.nu(g.translation)))

    def length(self, g: AffineWeylElement) -> int:
        q = self._scaled_point(g)
        return sum(abs(dot(a, q) // self.alcove_scale) for a in self.positive_roots)

    def affine_value_scaled(self, node: AffineSimpleRoot, g: AffineWeylElement) -> int:
        q = self._scaled_point(g)
        return dot(node.gradient, q) + self.alcove_scale * node.constant

    def simple_reflection(self, label: int) -> AffineWeylElement:
        node = self.node(label)
        key = ("simple", label)
        if key not in self._cache:
            w = self.reflection_index[node.gradient]
            coroot = self.coroots[node.gradient]
            shift = tuple(-node.constant * x for x in coroot)
            with self._lock:
                self._cache[key] = AffineWeylElement(self.lambda_of_vector(shift), w)
        return self._cache[key]

    def left_descent(self, g: AffineWeylElement) -> int | None:
        for n in self.nodes:
            if self.affine_value_scaled(n, g) < 0:
                return n.label
        return None

    def reduced_word(self, g: AffineWeylElement) -> tuple[tuple[int, ...], AffineWeylElement]:
        """(word, ω) with g = s_{word[0]} ... s_{word[-1]} · ω and ℓ(ω) = 0."""
        word = []
        while True:
            i = self.left_descent(g)
            if i is None:
                return tuple(word), g
            word.append(i)
            g = self.compose(self.simple_reflection(i), g)

    # -- Ω ------------------------------------------------------------

    def class_of(self, g: AffineWeylElement) -> tuple[int, ...]:
        """Image of g in W/W_af ≅ Ω, in canonical coordinates."""
        return self.omega_cokernel.reduce(self.lattice.quotient.lift(g.translation))

    def omega_element(self, cls: Sequence[int]) -> AffineWeylElement:
        cls = self.omega_cokernel.normalize(cls)
        key = ("omega", cls)
        if key not in self._cache:
            c = self._lambda_reduce(self.omega_cokernel.lift(cls))
            _, omega = self.reduced_word(AffineWeylElement(c, 0))
            with self._lock:
                self._cache[key] = omega
        return self._cache[key]

    def omega_generators(self) -> list[tuple[int, ...]]:
        k = len(self.omega_cokernel.moduli)
        return [tuple(1 if i == j else 0 for i in range(k)) for j in range(k)]

    def omega_torsion(self) -> list[tuple[int, ...]]:
        return self.omega_cokernel.torsion_elements()

    def node_permutation(self, omega: AffineWeylElement) -> dict[int, int]:
        """Labels permuted by a length-zero element: ω·(a, k) = (M a, k − (M a)·ν)."""
        M = self.finite_weyl.elements[omega.linear]
        nu = self.nu(omega.translation)
        index = {(n.gradient, n.constant): n.label for n in self.nodes}
        out = {}
        for n in self.nodes:
            grad = M.apply(n.gradient)
            key = (grad, n.constant - dot(grad, nu))
            if key not in index:
                raise ConsistencyError("length-zero element does not permute the affine simple roots", witness={"element": _element_dict(omega), "node": n.label})
            out[n.label] = index[key]
        return out

    def factor_af_omega(self, g: AffineWeylElement) -> tuple[tuple[int, ...], AffineWeylElement]:
        """g = w_af · ω with w_af given by a reduced word."""
        return self.reduced_word(g)

    def elements_in_box(self, radius: int) -> list[AffineWeylElement]:
        ranges = [range(d) if d else range(-radius, radius + 1) for d in self.lattice.quotient.moduli]
        out = []
        for c in product(*ranges):
            for w in range(len(self.finite_weyl.elements)):
                out.append(AffineWeylElement(tuple(c), w))
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "translations": self.translations.to_dict(),
            "apartment_rank": self.rank,
            "finite_weyl_order": self.finite_weyl.order,
            "omega": self.omega.to_dict(),
            "nodes": [n.to_dict() for n in self.nodes],
            "positive_roots": [list(a) for a in self.positive_roots],
        }


def _element_dict(g: AffineWeylElement) -> dict:
    return {"translation": list(g.translation), "linear": g.linear}


def _relative_coroots(rel: RelativeRootSystem, W0: RelativeWeylGroup) -> tuple[dict, dict]:
    coroots: dict[Vector, Vector] = {}
    reflection: dict[Vector, int] = {}
    s = rel.rank
    ident = IntegerMatrix.identity(s)
    for a in rel.roots:
        for idx, M in enumerate(W0.elements):
            if M == ident or M.apply(a) != tuple(-x for x in a):
                continue
            diff = ident - M
            k = next(i for i in range(s) if a[i])
            row = diff.row(k)
            if any(x % a[k] for x in row):
                continue
            cand = tuple(x // a[k] for x in row)
            if all(diff.entries[i][j] == a[i] * cand[j] for i in range(s) for j in range(s)):
                coroots[a] = cand
                reflection[a] = idx
                break
        else:
            raise AffineModelError("no integral reflection found for a relative root", witness={"root": list(a)})
    return coroots, reflection


def _double(a: Sequence[int]) -> Vector:
    return tuple(2 * x for x in a)


def wall_roots(rel: RelativeRootSystem) -> tuple[Vector, ...]:
    """Relative roots a with 2a not a root; a reduced system with the same reflections."""
    roots = set(rel.roots)
    return tuple(a for a in rel.roots if _double(a) not in roots)


def wall_simple_roots(rel: RelativeRootSystem) -> list[Vector]:
    roots = set(rel.roots)
    return [_double(a) if _double(a) in roots else a for a in rel.relative_simple]


def build_iwahori_weyl(G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig | None = None) -> IwahoriWeylDatum:
    """Iwahori–Weyl group W = Λ ⋊ W₀ with its affine simple roots and Ω."""
    cfg = config or HeckeConfig()
    check_marking(G, m)
    D = G.base
    F = G.frobenius()
    Fco = G.coweight_action(F)
    delta0 = set(m.delta0)
    if delta0 and delta0 != set(D.simple_indices):
        raise AffineModelError(
            "affine machinery models quasi-split data (empty delta0) or fully anisotropic data (delta0 = all simple roots)",
            witness={"delta0": sorted(delta0)},
        )
    rel = restricted_root_system(G, m)
    W0 = relative_weyl_group(G, m, WeylPath.DIRECT, cfg)
    lattice = fixed_quotient(Fco, [D.coroots[i] for i in m.delta0])
    n = D.rank
    s = rel.rank
    basis = list(rel.basis)

    # ν on Lf coordinates: project the ambient vector to V along ℚΔ₀∨.
    nu_columns = []
    for lf in lattice.basis:
        if not s:
            nu_columns.append(())
            continue
        sol = rational_solve(basis + [D.coroots[i] for i in m.delta0], lf)
        if sol is None or not _is_integral(sol[:s]):
            raise AffineModelError("translation lattice does not project integrally to the apartment", witness={"vector": list(lf)})
        nu_columns.append(tuple(int(x) for x in sol[:s]))

    lf_matrix = IntegerMatrix.from_columns(lattice.basis, n) if lattice.basis else IntegerMatrix.zeros(n, 0)
    lattice_action = []
    for rep in W0.representatives:
        cols = []
        for b in lattice.basis:
            coords = solve_integer(lf_matrix, rep.comatrix.apply(b))
            if coords is None:
                raise AffineModelError("Weyl element does not preserve the translation lattice", witness={"word": list(rep.word)})
            cols.append(coords)
        p = len(lattice.basis)
        lattice_action.append(IntegerMatrix.from_columns(cols, p) if p else IntegerMatrix.zeros(0, 0))

    index = {N: i for i, N in enumerate(W0.coelements)}
    product_table = tuple(tuple(index[A @ B] for B in W0.coelements) for A in W0.coelements)
    ident = IntegerMatrix.identity(s)
    inverse_table = tuple(next(j for j, B in enumerate(W0.coelements) if A @ B == ident) for A in W0.coelements)

    coroots, reflection_index = _relative_coroots(rel, W0)
    simple = wall_simple_roots(rel)
    walls = wall_roots(rel)
    if not rel.is_reduced:
        log.debug("non-reduced restricted system for %s: walls from %s", D.name, walls)
    r = len(simple)
    positive = []
    coefficients: dict[Vector, tuple[int, ...]] = {}
    for a in walls:
        sol = rational_solve(simple, a)
        if sol is None or not _is_integral(sol):
            raise AffineModelError("relative root outside the simple lattice", witness={"root": list(a)})
        coeffs = tuple(int(x) for x in sol)
        coefficients[a] = coeffs
        if all(x >= 0 for x in coeffs):
            positive.append(a)
    cartan = IntegerMatrix.from_rows([[dot(simple[j], coroots[simple[i]]) for j in range(r)] for i in range(r)], r)
    comps = dynkin_components(cartan) if r else []

    nodes: list[AffineSimpleRoot] = []
    heights: dict[int, int] = {}
    for c, comp in enumerate(comps):
        in_comp = [a for a in positive if all(coefficients[a][k] == 0 for k in range(r) if k not in comp)]
        theta = max(in_comp, key=lambda a: (sum(coefficients[a]), a))
        heights[c] = sum(coefficients[theta])
        label = 0 if c == 0 else r + c
        nodes.append(AffineSimpleRoot(label, tuple(-x for x in theta), 1, c, True))
    for k, a in enumerate(simple):
        c = next(ci for ci, comp in enumerate(comps) if k in comp)
        nodes.append(AffineSimpleRoot(k + 1, a, 0, c, False))
    nodes.sort(key=lambda nd: nd.label)

    # generic alcove point: every affine simple root takes the value 1/(h_c + 1) on its component
    if r:
        eps = [Rational(1, heights[next(ci for ci, comp in enumerate(comps) if k in comp)] + 1) for k in range(r)]
        y = Matrix(cartan.to_list()).T.solve(Matrix(eps)) if r else Matrix([])
        point = [Rational(0)] * s
        for k in range(r):
            for i in range(s):
                point[i] += y[k] * coroots[simple[k]][i]
        scale = fold(ilcm, [x.q for x in point], 1)
        alcove_point = tuple(int(x * scale) for x in point)
    else:
        scale = 1
        alcove_point = tuple(0 for _ in range(s))

    # Ω = Λ / ℤΦ∨ on Lf coordinates
    coroot_cols = []
    for a in simple:
        ambient = [0] * n
        for k, b in zip(coroots[a], basis):
            for i in range(n):
                ambient[i] += k * b[i]
        coords = solve_integer(lf_matrix, ambient)
        if coords is None:
            raise AffineModelError("relative coroot is not a translation", witness={"root": list(a)})
        coroot_cols.append(coords)
    p = len(lattice.basis)
    rel_matrix = lattice.relations
    if coroot_cols:
        rel_matrix = rel_matrix.hstack(IntegerMatrix.from_columns(coroot_cols, p))
    omega_cok = cokernel(rel_matrix)

    datum = IwahoriWeylDatum(
        galois=G,
        marking=m,
        lattice=lattice,
        translations=lattice.quotient.group,
        finite_weyl=W0,
        relative_roots=rel,
        simple_gradients=tuple(simple),
        positive_roots=tuple(sorted(positive)),
        coroots=coroots,
        reflection_index=reflection_index,
        nodes=tuple(nodes),
        lattice_action=tuple(lattice_action),
        product_table=product_table,
        inverse_table=inverse_table,
        nu_columns=tuple(nu_columns),
        alcove_point=alcove_point,
        alcove_scale=scale,
        omega_cokernel=omega_cok,
        name=D.name,
    )
    log.info("built Iwahori-Weyl datum %s: Lambda=%s Omega=%s", D.name, datum.translations.label, datum.omega.label)
    return datum


def check_af_omega_factorization(D: IwahoriWeylDatum, radius: int) -> dict:
    """Every element of the box factors uniquely as W_af · Ω."""
    seen_omega: dict[tuple[int, ...], AffineWeylElement] = {}
    count = 0
    for g in D.elements_in_box(radius):
        word, omega = D.reduced_word(g)
        if D.length(omega) != 0 or len(word) != D.length(g):
            raise ConsistencyError("descent did not reach a length-zero element", witness=_element_dict(g))
        cls = D.class_of(g)
        expected = D.omega_element(cls)
        if omega != expected:
            raise ConsistencyError(
                "two length-zero elements in one W_af coset",
                witness={"element": _element_dict(g), "found": _element_dict(omega), "expected": _element_dict(expected)},
            )
        if D.class_of(omega) != cls:
            raise ConsistencyError("Omega part changed the class", witness=_element_dict(g))
        seen_omega[cls] = omega
        count += 1
    return {"elements": count, "omega_classes": len(seen_omega)}


# -- facets -----------------------------------------------------------------


@dataclass(frozen=True)
class FacetData:
    J: tuple[int, ...]
    WJ: tuple[AffineWeylElement, ...]
    S_f_af: tuple[tuple[int, AffineWeylElement], ...]
    Omega_f: tuple[tuple[int, ...], ...]
    Omega_f_tor: tuple[tuple[int, ...], ...]
    Omega_f_one_tor: tuple[tuple[int, ...], ...] = ()
    XJ: tuple[Vector, ...] = ()
    x_f: QVector = ()
    S_f: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()
    W0_J: tuple[AffineWeylElement, ...] = ()
    Xf: tuple[QVector, ...] = ()
    omega_translations: tuple[QVector, ...] = ()
    Rf: BasedRootDatum | None = None
    Rf_nodes: tuple[int, ...] = ()
    parallel_reflections: tuple[tuple[int, AffineWeylElement], ...] = ()
    levi: LeviClass | None = None
    certificates: dict = field(default_factory=dict, compare=False)

    @property
    def generators(self) -> dict[int, AffineWeylElement]:
        return dict(self.S_f_af)

    def to_dict(self) -> dict:
        return {
            "J": list(self.J),
            "WJ_order": len(self.WJ),
            "S_f_af": [lab for lab, _ in self.S_f_af],
            "S_f": list(self.S_f),
            "Omega_f_generators": [list(o) for o in self.Omega_f],
            "Omega_f_tor": [list(o) for o in self.Omega_f_tor],
            "XJ": [list(v) for v in self.XJ],
            "x_f": [str(x) for x in self.x_f],
            "W0_J_order": len(self.W0_J),
            "Xf": [[str(x) for x in v] for v in self.Xf],
            "Rf": self.Rf.to_dict() if self.Rf is not None else None,
            "Rf_type": list(validate_and_classify(self.Rf).types) if self.Rf is not None else None,
            "levi": self.levi.to_dict() if self.levi is not None else None,
            "certificates": self.certificates,
        }


def _closure(D: IwahoriWeylDatum, gens: Sequence[AffineWeylElement], cap: int) -> list[AffineWeylElement]:
    out = [D.identity]
    seen = {D.identity}
    queue = deque([D.identity])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = D.compose(g, s)
            if h not in seen:
                seen.add(h)
                out.append(h)
                queue.append(h)
                if len(out) > cap:
                    raise EnumerationCapExceeded("finite subgroup closure exceeds the cap", witness={"cap": cap})
    return out


def _longest(D: IwahoriWeylDatum, elements: Sequence[AffineWeylElement]) -> AffineWeylElement:
    return max(elements, key=lambda g: (D.length(g), g))


def _stabilizer_generators(D: IwahoriWeylDatum, J: frozenset[int]) -> list[tuple[int, ...]]:
    """Generators of {ω ∈ Ω : ω(J) = J}, by Schreier's lemma on the node action."""
    gens = D.omega_generators()
    perms = [D.node_permutation(D.omega_element(g)) for g in gens]
    labels = D.node_labels
    ident = tuple(labels)
    zero = tuple(0 for _ in D.omega_cokernel.moduli)
    tree: dict[tuple[int, ...], tuple[int, ...]] = {ident: zero}
    queue = deque([ident])
    kernel: list[tuple[int, ...]] = []
    while queue:
        e = queue.popleft()
        emap = dict(zip(labels, e))
        for g, p in zip(gens, perms):
            image = tuple(p[emap[lab]] for lab in labels)
            coords = D.omega_cokernel.normalize(tuple(a + b for a, b in zip(tree[e], g)))
            if image in tree:
                diff = D.omega_cokernel.normalize(tuple(a - b for a, b in zip(coords, tree[image])))
                if any(diff) and diff not in kernel:
                    kernel.append(diff)
            else:
                tree[image] = coords
                queue.append(image)
    out = list(kernel)
    for e, coords in tree.items():
        emap = dict(zip(labels, e))
        if {emap[j] for j in J} == set(J) and any(coords) and coords not in out:
            out.append(coords)
    return out


def analyze_facet(D: IwahoriWeylDatum, J: Iterable[int], config: HeckeConfig | None = None) -> FacetData:
    """Group-level data of the facet J: W_J, S_{f,af}, Ω_f and Ω_{f,tor}."""
    cfg = config or HeckeConfig()
    Jset = frozenset(int(j) for j in J)
    labels = set(D.node_labels)
    if not Jset <= labels:
        raise ValueError(f"J={sorted(Jset)} is not a subset of the affine simple roots {sorted(labels)}")
    comps = D.components()
    for c, members in comps.items():
        if set(members) <= Jset:
            raise ValueError(f"J contains every affine simple root of component {c}")
    WJ = _closure(D, [D.simple_reflection(j) for j in sorted(Jset)], cfg.max_elements)
    wJ = _longest(D, WJ)
    WJ_set = set(WJ)
    J_refl = {D.simple_reflection(j) for j in Jset}
    S_f_af: list[tuple[int, AffineWeylElement]] = []
    for c, members in sorted(comps.items()):
        remaining = [i for i in members if i not in Jset]
        if len(remaining) < 2:
            continue
        for i in remaining:
            bigger = _closure(D, [D.simple_reflection(j) for j in sorted(Jset | {i})], cfg.max_elements)
            s = D.compose(_longest(D, bigger), D.inverse(wJ))
            sinv = D.inverse(s)
            if D.compose(s, s) != D.identity:
                raise FacetConstructionError(
                    f"w_(J+{i}) w_J is not an involution",
                    witness={"J": sorted(Jset), "i": i, "element": _element_dict(s)},
                )
            conj = {D.multiply(s, x, sinv) for x in J_refl}
            if conj != J_refl:
                raise FacetConstructionError(
                    f"w_(J+{i}) w_J does not stabilise J",
                    witness={"J": sorted(Jset), "i": i},
                )
            if {D.multiply(s, x, sinv) for x in WJ} != WJ_set:
                raise FacetConstructionError(f"w_(J+{i}) w_J does not normalise W_J", witness={"J": sorted(Jset), "i": i})
            S_f_af.append((i, s))

    omega_f = _stabilizer_generators(D, Jset)
    outside = labels - Jset
    tor = []
    one_tor = []
    gens = [s for _, s in S_f_af]
    for cls in D.omega_torsion():
        om = D.omega_element(cls)
        perm = D.node_permutation(om)
        if {perm[j] for j in Jset} != set(Jset):
            continue
        if all(perm[i] == i for i in outside):
            tor.append(cls)
        om_inv = D.inverse(om)
        if all(D.multiply(om, s, om_inv) == s for s in gens):
            one_tor.append(cls)
    log.debug("facet J=%s: |W_J|=%d, |S_f_af|=%d, |Omega_f_tor|=%d", sorted(Jset), len(WJ), len(S_f_af), len(tor))
    return FacetData(
        J=tuple(sorted(Jset)),
        WJ=tuple(WJ),
        S_f_af=tuple(S_f_af),
        Omega_f=tuple(omega_f),
        Omega_f_tor=tuple(tor),
        Omega_f_one_tor=tuple(one_tor),
    )


def check_af_omega_facet(D: IwahoriWeylDatum, f: FacetData, radius: int) -> dict:
    """W(J,σ) ∩ ball factors uniquely as W_af(J,σ)·Ω_f (no nontrivial Ω_f element lies in W_af(J,σ))."""
    waf = _word_ball(D, [s for _, s in f.S_f_af], radius)
    omegas = _omega_f_sample(D, f)
    hits = [cls for cls, om in omegas.items() if any(cls) and om in waf]
    if hits:
        raise ConsistencyError("an element of Omega_f lies in W_af(J)", witness=[list(h) for h in hits])
    for cls, om in omegas.items():
        om_inv = D.inverse(om)
        gens = {s for _, s in f.S_f_af}
        if {D.multiply(om, s, om_inv) for s in gens} != gens:
            raise ConsistencyError("Omega_f does not permute S_f_af", witness=list(cls))
    products = {D.compose(w, om) for w in waf for om in omegas.values()}
    if len(products) != len(waf) * len(omegas):
        raise ConsistencyError("W_af(J) . Omega_f factorisation is not unique")
    return {"W_af_J_ball": len(waf), "Omega_f_sample": len(omegas), "products": len(products)}


def _word_ball(D: IwahoriWeylDatum, gens: Sequence[AffineWeylElement], radius: int) -> set[AffineWeylElement]:
    ball = {D.identity}
    frontier = [D.identity]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in gens:
                h = D.compose(g, s)
                if h not in ball:
                    ball.add(h)
                    nxt.append(h)
        frontier = nxt
    return ball


def _omega_f_sample(D: IwahoriWeylDatum, f: FacetData) -> dict[tuple[int, ...], AffineWeylElement]:
    """Ω_f elements: all of them when finite, generator powers in [-2, 2] otherwise."""
    moduli = D.omega_cokernel.moduli
    finite = all(moduli)
    gens = list(f.Omega_f)
    if finite:
        seen = {tuple(0 for _ in moduli)}
        frontier = list(seen)
        while frontier:
            nxt = []
            for c in frontier:
                for g in gens:
                    h = D.omega_cokernel.normalize(tuple(a + b for a, b in zip(c, g)))
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        classes = seen
    else:
        classes = set()
        for exps in product(range(-2, 3), repeat=len(gens)):
            c = [0] * len(moduli)
            for e, g in zip(exps, gens):
                c = [a + e * b for a, b in zip(c, g)]
            classes.add(D.omega_cokernel.normalize(c))
    return {cls: D.omega_element(cls) for cls in sorted(classes)}


def _component_parts(D: IwahoriWeylDatum, v: Sequence) -> dict[int, QVector]:
    """Decompose v ∈ V into its pieces in the coroot span of each component."""
    simple = list(D.simple_gradients)
    comps: dict[int, list[int]] = {}
    for n in D.nodes:
        if not n.is_affine:
            comps.setdefault(n.component, []).append(n.label - 1)
    out = {}
    for c, ks in comps.items():
        cartan = Matrix([[dot(simple[j], D.coroots[simple[i]]) for j in ks] for i in ks])
        rhs = Matrix([_qdot(simple[i], v) for i in ks])
        y = cartan.T.solve(rhs)
        part = [Rational(0)] * D.rank
        for idx, k in enumerate(ks):
            for t in range(D.rank):
                part[t] += y[idx] * D.coroots[simple[k]][t]
        out[c] = tuple(part)
    return out


def _vertex(D: IwahoriWeylDatum, component: int, opposite: int) -> QVector:
    """Vertex of the fundamental alcove in one component where every node but ``opposite`` vanishes."""
    simple = list(D.simple_gradients)
    ks = [n.label - 1 for n in D.nodes if n.component == component and not n.is_affine]
    eqs = [n for n in D.nodes if n.component == component and n.label != opposite]
    A = Matrix([[dot(n.gradient, D.coroots[simple[k]]) for k in ks] for n in eqs])
    b = Matrix([-n.constant for n in eqs])
    y = A.solve(b)
    point = [Rational(0)] * D.rank
    for idx, k in enumerate(ks):
        for t in range(D.rank):
            point[t] += y[idx] * D.coroots[simple[k]][t]
    return tuple(point)


def _drop_choice(D: IwahoriWeylDatum, labels: Sequence[int]) -> int:
    """Largest node in the order where the affine node comes last."""
    return max(labels, key=lambda lab: (D.node(lab).is_affine, lab))


def facet_root_datum(D: IwahoriWeylDatum, f: FacetData, config: HeckeConfig | None = None) -> FacetData:
    """Complete a facet with X(J), x_f, W°(J,σ), X_f and the root datum R_f."""
    cfg = config or HeckeConfig()
    gens = dict(f.S_f_af)
    comps = D.components()
    Jset = set(f.J)
    s = D.rank
    zero = tuple(Rational(0) for _ in range(s))

    # distinguished vertex
    x_f = list(zero)
    dropped = []
    p_f = list(zero)
    single = []
    for c, members in sorted(comps.items()):
        remaining = [i for i in members if i not in Jset]
        d = _drop_choice(D, remaining)
        if len(remaining) >= 2:
            dropped.append(d)
        else:
            single.append(c)
        v = _vertex(D, c, d)
        x_f = [a + b for a, b in zip(x_f, v)]
        verts = [_vertex(D, c, i) for i in remaining]
        for vert in verts:
            p_f = [a + b / len(verts) for a, b in zip(p_f, vert)]
    x_f = tuple(x_f)
    p_f = tuple(p_f)
    S_f = tuple(i for i in gens if i not in dropped)
    for i in S_f:
        if D.act(gens[i], x_f) != x_f:
            raise ReconstructionError("a generator of S_f does not fix the distinguished vertex", witness={"node": i})
    for i in dropped:
        if D.act(gens[i], x_f) == x_f:
            raise ReconstructionError("the dropped generator fixes the distinguished vertex", witness={"node": i})

    W0J = _closure(D, [gens[i] for i in S_f], cfg.max_elements)
    W0J_set = set(W0J)

    def translation_part(g: AffineWeylElement) -> QVector:
        return tuple(a - b for a, b in zip(D.act(g, x_f), x_f))

    # X(J): ℤ-span of the W°-orbit of the dropped generators' translations
    seeds = [translation_part(gens[d]) for d in dropped]
    orbit = []
    for w in W0J:
        M = D.linear_matrix(w.linear)
        for t in seeds:
            orbit.append(_qapply(M, t))
    if not all(_is_integral(v) for v in orbit):
        raise ReconstructionError("translation part of W_af(J) is not integral", witness=[[str(x) for x in v] for v in orbit])
    XJ = lattice_basis([tuple(int(x) for x in v) for v in orbit], s)

    # semidirect decomposition W_af(J) = X(J) ⋊ W° on the word ball
    ball = _word_ball(D, list(gens.values()), cfg.radius)
    XJ_matrix = IntegerMatrix.from_columns(XJ, s) if XJ else IntegerMatrix.zeros(s, 0)
    for g in ball:
        t = translation_part(g)
        if not _is_integral(t) or solve_integer(XJ_matrix, tuple(int(x) for x in t)) is None:
            raise ConsistencyError("element of W_af(J) with translation outside X(J)", witness=_element_dict(g))
        u = D.compose(D.inverse(D.translation_element(tuple(int(x) for x in t))), g)
        if u not in W0J_set:
            raise ConsistencyError("element of W_af(J) does not split as X(J) . W°", witness=_element_dict(g))
    stabilizer = {g for g in ball if D.act(g, x_f) == x_f}
    if not stabilizer <= W0J_set or not W0J_set <= ball:
        raise ConsistencyError("W° is not the stabiliser of the distinguished vertex in the ball")

    # rank chain
    if not (len(S_f) == len(XJ)):
        raise ConsistencyError("rank chain |S_f| = rk X(J) fails", witness={"S_f": list(S_f), "rank": len(XJ)})

    # X_f = X(J) + ⟨ω_t⟩, projected away from the components where f is a vertex
    def project(v: Sequence) -> QVector:
        parts = _component_parts(D, v)
        out = list(_qvec(v))
        for c in single:
            if c in parts:
                out = [a - b for a, b in zip(out, parts[c])]
        return tuple(out)

    omega_t = []
    for cls in f.Omega_f:
        om = D.omega_element(cls)
        omega_t.append(project(translation_part(om)))
    Xf = rational_lattice_basis([tuple(Rational(x) for x in v) for v in XJ] + omega_t, s)

    # R_f: simple roots from the minimal translations s_i' s_i
    betas: list[Vector] = []
    cobetas: list[QVector] = []
    parallel = []
    for i in S_f:
        w = gens[i].linear
        a = next(r for r, idx in D.reflection_index.items() if idx == w and r in D.positive_roots)
        av = D.coroots[a]
        if _qdot(a, tuple(pi - xi for pi, xi in zip(p_f, x_f))) < 0:
            a = tuple(-x for x in a)
            av = tuple(-x for x in av)
        elif _qdot(a, tuple(pi - xi for pi, xi in zip(p_f, x_f))) == 0:
            raise ReconstructionError("facet lies on a reflecting hyperplane of W°", witness={"node": i})
        coords = rational_solve(XJ, av)
        if coords is None:
            raise ReconstructionError("coroot direction is not in X(J) ⊗ Q", witness={"node": i})
        L = fold(ilcm, [x.q for x in coords], 1)
        g = fold(igcd, [int(x * L) for x in coords], 0)
        mult = Rational(L, g)
        beta = tuple(int(mult * x) for x in av)
        betas.append(beta)
        cobetas.append(tuple(Rational(x) / mult for x in a))
        parallel.append((i, D.compose(D.translation_element(beta), gens[i])))

    roots: list[Vector] = []
    coroots: list[QVector] = []
    for w in W0J:
        N = D.linear_matrix(w.linear)
        M = D.finite_weyl.elements[w.linear]
        for b, cb in zip(betas, cobetas):
            nb = N.apply(b)
            if nb not in roots:
                roots.append(nb)
                coroots.append(_qapply(M, cb))
    Rf = _datum_in_basis(Xf, roots, coroots, betas, D.name, f.J)
    try:
        cls = validate_and_classify(Rf)
    except Exception as exc:
        raise ReconstructionError(f"R_f fails validation: {exc}", witness={"J": list(f.J)}) from exc

    # Weyl group of R_f equals W° as matrix groups on X_f
    weyl_rf = {w.matrix for w in weyl_group_elements(Rf, cfg.max_elements)}
    w0_mats = set()
    for w in W0J:
        N = D.linear_matrix(w.linear)
        cols = [rational_solve(Xf, _qapply(N, b)) for b in Xf]
        if any(c is None or not _is_integral(c) for c in cols):
            raise ReconstructionError("W° does not preserve X_f")
        w0_mats.add(IntegerMatrix.from_columns([tuple(int(x) for x in c) for c in cols], len(Xf)) if Xf else IntegerMatrix.zeros(0, 0))
    if weyl_rf != w0_mats:
        raise ReconstructionError("Weyl group of R_f differs from W°", witness={"weyl_rf": len(weyl_rf), "W0": len(w0_mats)})

    levi_roots = []
    for a in D.relative_roots.roots:
        c = _root_component(D, a)
        verts = [_vertex(D, c, i) for i in comps[c] if i not in Jset]
        if len({_qdot(a, v) for v in verts}) == 1:
            levi_roots.append(a)
    levi = levi_class_of_relative(D.galois, D.marking, levi_roots, cfg)

    done = replace(
        f,
        XJ=tuple(XJ),
        x_f=x_f,
        S_f=S_f,
        dropped=tuple(dropped),
        W0_J=tuple(W0J),
        Xf=tuple(Xf),
        omega_translations=tuple(omega_t),
        Rf=Rf,
        Rf_nodes=S_f,
        parallel_reflections=tuple(parallel),
        levi=levi,
        certificates={"rank_chain": len(S_f), "W0_order": len(W0J), "types": list(cls.types), "ball": len(ball)},
    )
    certify_facet_map(D, done)
    return done


def _root_component(D: IwahoriWeylDatum, a: Vector) -> int:
    simple = list(D.simple_gradients)
    sol = rational_solve(simple, a)
    k = next(i for i, x in enumerate(sol) if x != 0)
    return D.node(k + 1).component


def _datum_in_basis(
    Xf: Sequence[QVector], roots: Sequence[Vector], coroots: Sequence[QVector], simple: Sequence[Vector], name: str, J: Sequence[int]
) -> BasedRootDatum:
    root_coords = []
    for r in roots:
        c = rational_solve(Xf, r)
        if c is None or not _is_integral(c):
            raise ReconstructionError("root of R_f outside X_f", witness={"root": list(r)})
        root_coords.append(tuple(int(x) for x in c))
    coroot_coords = []
    for cv in coroots:
        vals = [_qdot(cv, b) for b in Xf]
        if not _is_integral(vals):
            raise ReconstructionError("coroot of R_f is not integral on X_f", witness={"coroot": [str(x) for x in cv]})
        coroot_coords.append(tuple(int(x) for x in vals))
    simple_idx = tuple(roots.index(b) for b in simple)
    label = ",".join(str(j) for j in J)
    return BasedRootDatum(len(Xf), tuple(root_coords), tuple(coroot_coords), simple_idx, f"R_f({name};J=[{label}])")


def _xf_coords(Xf: Sequence[QVector], v: Sequence) -> tuple[int, ...] | None:
    c = rational_solve(Xf, v)
    if c is None or not _is_integral(c):
        return None
    return tuple(int(x) for x in c)


def certify_facet_map(D: IwahoriWeylDatum, f: FacetData, xj_radius: int = 3) -> dict:
    """The map W(J,σ)/Ω_{f,tor} → W° ⋉ X_f is injective and hits the enumerated targets."""
    x_f = f.x_f
    comps = D.components()
    single = [c for c, members in comps.items() if len([i for i in members if i not in set(f.J)]) < 2]

    def project(v: Sequence) -> QVector:
        parts = _component_parts(D, v)
        out = list(_qvec(v))
        for c in single:
            if c in parts:
                out = [a - b for a, b in zip(out, parts[c])]
        return tuple(out)

    def key(g: AffineWeylElement) -> tuple:
        t = project(tuple(a - b for a, b in zip(D.act(g, x_f), x_f)))
        N = D.linear_matrix(g.linear)
        lin = tuple(project(_qapply(N, b)) for b in f.Xf)
        return (_xf_coords(f.Xf, t), lin)

    omegas = _omega_f_sample(D, f)
    tor = set(f.Omega_f_tor)
    translations = []
    for c in product(range(-xj_radius, xj_radius + 1), repeat=len(f.XJ)):
        v = [0] * D.rank
        for k, b in zip(c, f.XJ):
            v = [a + k * x for a, x in zip(v, b)]
        translations.append(D.translation_element(v))
    images: dict[tuple, AffineWeylElement] = {}
    for t in translations:
        for w in f.W0_J:
            tw = D.compose(t, w)
            for cls, om in omegas.items():
                g = D.compose(tw, om)
                k = key(g)
                if k[0] is None:
                    raise ConsistencyError("translation part outside X_f", witness=_element_dict(g))
                prev = images.get(k)
                if prev is None:
                    images[k] = g
                    continue
                diff = D.compose(D.inverse(prev), g)
                if D.length(diff) != 0 or D.class_of(diff) not in tor:
                    raise ConsistencyError(
                        "facet map is not injective modulo Omega_f_tor",
                        witness={"first": _element_dict(prev), "second": _element_dict(g)},
                    )
    missed = 0
    targets = 0
    generators = [_qvec(v) for v in f.XJ] + list(f.omega_translations)
    goals = set()
    for c in product(range(-1, 2), repeat=len(generators)):
        v = [Rational(0)] * D.rank
        for k, b in zip(c, generators):
            v = [a + k * x for a, x in zip(v, b)]
        goals.add(_xf_coords(f.Xf, v))
    for coords in sorted(goals):
        for w in f.W0_J:
            targets += 1
            N = D.linear_matrix(w.linear)
            lin = tuple(project(_qapply(N, b)) for b in f.Xf)
            if (coords, lin) not in images:
                missed += 1
    if missed:
        raise ConsistencyError("facet map misses enumerated targets", witness={"missed": missed, "targets": targets})
    return {"images": len(images), "targets": targets}


def check_center_torsion(f: FacetData) -> bool:
    """Torsion of the center Ω_f^1 equals Ω_{f,tor}."""
    return set(f.Omega_f_one_tor) == set(f.Omega_f_tor)


def conjugate_node(D: IwahoriWeylDatum, f: FacetData, element: AffineWeylElement, radius: int) -> int | None:
    """Label of the generator of S_{f,af} conjugate to ``element`` inside W(J,σ)."""
    gens = dict(f.S_f_af)
    for lab, s in gens.items():
        if s == element:
            return lab
    ball = _word_ball(D, list(gens.values()), radius)
    for om in _omega_f_sample(D, f).values():
        for b in ball:
            h = D.compose(b, om)
            hinv = D.inverse(h)
            for lab, s in gens.items():
                if D.multiply(h, s, hinv) == element:
                    return lab
    return None


def omega_f_quotient(D: IwahoriWeylDatum, f: FacetData) -> FinGenAbelianGroup:
    """Ω_f / Ω_{f,tor} as an abstract group."""
    cok = D.omega_cokernel
    lifts = [cok.lift(t) for t in f.Omega_f_tor if any(t)]
    rel = cok.matrix
    if lifts:
        rel = rel.hstack(IntegerMatrix.from_columns(lifts, rel.rows))
    quotient = cokernel(rel)
    images = [quotient.reduce(cok.lift(g)) for g in f.Omega_f]
    images = [im for im in images if any(im)]
    return FinGenAbelianGroup.from_finite_elements(images, quotient.moduli)
