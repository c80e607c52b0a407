#!/usr/bin/env python3
"""Finite Galois actions on based root data and the relative root systems they cut out."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

from .config import HeckeConfig
from .errors import EnumerationCapExceeded, GaloisActionError
from .integer_modules import IntegerMatrix, Vector, kernel_basis, multiplicative_order, rational_solve
from .root_datum import BasedRootDatum, WeylGroupElement, longest_element, validate_and_classify, weyl_group_elements

log = logging.getLogger(__name__)


class WeylPath(str, Enum):
    DIRECT = "direct"
    DUAL = "dual"


@dataclass(frozen=True)
class GaloisDatum:
    base: BasedRootDatum
    generators: tuple[IntegerMatrix, ...]
    group_elements: tuple[IntegerMatrix, ...]

    @property
    def order(self) -> int:
        return len(self.group_elements)

    @cached_property
    def simple_permutations(self) -> tuple[dict[int, int], ...]:
        """For each group element, its permutation of the simple root indices."""
        D = self.base
        return tuple({i: D.root_index[g.apply(D.roots[i])] for i in D.simple_indices} for g in self.group_elements)

    def coweight_action(self, g: IntegerMatrix) -> IntegerMatrix:
        """g∨ on X_*, the inverse transpose."""
        return g.inverse().transpose()

    def orbit(self, i: int) -> tuple[int, ...]:
        return tuple(sorted({p[i] for p in self.simple_permutations}))

    def frobenius(self) -> IntegerMatrix:
        """A generator of Γ when Γ is cyclic."""
        n = self.base.rank
        if self.order == 1:
            return IntegerMatrix.identity(n)
        for g in self.group_elements:
            if multiplicative_order(g, self.order) == self.order:
                return g
        raise GaloisActionError("Galois image is not cyclic; a single Frobenius is required here", witness={"order": self.order})


@dataclass(frozen=True)
class AnisotropicMarking:
    delta0: tuple[int, ...] = ()


@dataclass(frozen=True)
class RelativeRootSystem:
    basis: tuple[Vector, ...]
    restriction_map: IntegerMatrix
    restricted_roots: tuple[tuple[Vector, int], ...]
    relative_simple: tuple[Vector, ...]
    orbits: tuple[tuple[int, ...], ...]
    images: tuple[Vector, ...] = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def roots(self) -> tuple[Vector, ...]:
        return tuple(r for r, _ in self.restricted_roots)

    @property
    def is_reduced(self) -> bool:
        roots = set(self.roots)
        return not any(tuple(2 * x for x in r) in roots for r in roots)

    def multiplicity(self, root: Sequence[int]) -> int:
        return dict(self.restricted_roots).get(tuple(root), 0)


@dataclass(frozen=True)
class RelativeWeylGroup:
    elements: tuple[IntegerMatrix, ...]
    coelements: tuple[IntegerMatrix, ...]
    representatives: tuple[WeylGroupElement, ...]
    provenance: WeylPath

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def as_set(self) -> frozenset[IntegerMatrix]:
        return frozenset(self.elements)


def galois_datum(
    base: BasedRootDatum,
    generators: Iterable[IntegerMatrix],
    config: HeckeConfig | None = None,
) -> GaloisDatum:
    """Validate generators (root-permuting, Δ-stable) and close them into a finite group."""
    cfg = config or HeckeConfig()
    validate_and_classify(base)
    gens = tuple(generators)
    simple = set(base.simple_indices)
    coindex = {c: i for i, c in enumerate(base.coroots)}
    for g in gens:
        if g.rows != base.rank or not g.is_unimodular():
            raise GaloisActionError("generator is not a lattice automorphism", witness={"matrix": g.to_list()})
        multiplicative_order(g, cfg.order_bound)
        co = g.inverse().transpose()
        for i, (a, c) in enumerate(zip(base.roots, base.coroots)):
            j = base.root_index.get(g.apply(a))
            if j is None or coindex.get(co.apply(c)) != j:
                raise GaloisActionError("generator does not permute the roots", witness={"matrix": g.to_list(), "root": list(a)})
            if i in simple and j not in simple:
                raise GaloisActionError("generator does not stabilise the simple roots", witness={"matrix": g.to_list(), "root": list(a)})
    ident = IntegerMatrix.identity(base.rank)
    elements = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                p = g @ h
                if p not in seen:
                    seen.add(p)
                    elements.append(p)
                    nxt.append(p)
                    if len(elements) > cfg.galois_closure_bound:
                        raise EnumerationCapExceeded(
                            f"Galois closure exceeds {cfg.galois_closure_bound} elements",
                            witness={"cap": cfg.galois_closure_bound},
                        )
        frontier = nxt
    log.debug("Galois closure of %d generators has order %d", len(gens), len(elements))
    return GaloisDatum(base, gens, tuple(elements))


def check_marking(G: GaloisDatum, m: AnisotropicMarking) -> None:
    simple = set(G.base.simple_indices)
    if not set(m.delta0) <= simple:
        raise GaloisActionError("delta0 is not a subset of the simple indices", witness=list(m.delta0))
    d0 = set(m.delta0)
    for perm in G.simple_permutations:
        if {perm[i] for i in d0} != d0:
            raise GaloisActionError("delta0 is not stable under the Galois action", witness=list(m.delta0))


def _fixed_coweights(G: GaloisDatum, m: AnisotropicMarking) -> list[Vector]:
    D = G.base
    n = D.rank
    rows: list[Vector] = []
    for g in G.generators:
        shifted = G.coweight_action(g) - IntegerMatrix.identity(n)
        rows.extend(shifted.entries)
    rows.extend(D.roots[i] for i in m.delta0)
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    return kernel_basis(IntegerMatrix.from_rows(rows, n))


def restricted_root_system(G: GaloisDatum, m: AnisotropicMarking) -> RelativeRootSystem:
    """Restriction of Φ(G,T) to the maximal split torus model X_*(S)."""
    check_marking(G, m)
    D = G.base
    basis = _fixed_coweights(G, m)
    restriction = IntegerMatrix.from_rows(basis, D.rank) if basis else IntegerMatrix.zeros(0, D.rank)
    images = tuple(restriction.apply(a) for a in D.roots)
    counts = Counter(im for im in images if any(im))
    restricted = tuple(sorted(counts.items()))
    d0 = set(m.delta0)
    orbits = []
    seen: set[int] = set()
    for i in D.simple_indices:
        if i in d0 or i in seen:
            continue
        orb = G.orbit(i)
        seen.update(orb)
        orbits.append(orb)
    relative_simple = tuple(images[orb[0]] for orb in orbits)
    return RelativeRootSystem(tuple(basis), restriction, restricted, relative_simple, tuple(orbits), images)


def _coweight_coordinates(basis: Sequence[Vector], vec: Sequence[int]) -> Vector | None:
    sol = rational_solve(basis, vec)
    if sol is None or any(not x.is_integer for x in sol):
        return None
    return tuple(int(x) for x in sol)


def _action_matrices(basis: Sequence[Vector], w: WeylGroupElement) -> tuple[IntegerMatrix, IntegerMatrix] | None:
    s = len(basis)
    cols = []
    for b in basis:
        coords = _coweight_coordinates(basis, w.comatrix.apply(b))
        if coords is None:
            return None
        cols.append(coords)
    N = IntegerMatrix.from_columns(cols, s) if s else IntegerMatrix.zeros(0, 0)
    M = N.inverse().transpose() if s else N
    return M, N


def _quotient_action(basis: Sequence[Vector], delta0_coroots: Sequence[Vector], w: WeylGroupElement) -> tuple[IntegerMatrix, IntegerMatrix] | None:
    """Action on X_*(T)/ℤΔ₀∨ ⊗ ℚ read back on the fixed coweights."""
    s = len(basis)
    columns = list(basis) + list(delta0_coroots)
    cols = []
    for b in basis:
        sol = rational_solve(columns, w.comatrix.apply(b))
        if sol is None or any(not x.is_integer for x in sol[:s]):
            return None
        cols.append(tuple(int(x) for x in sol[:s]))
    N = IntegerMatrix.from_columns(cols, s) if s else IntegerMatrix.zeros(0, 0)
    M = N.inverse().transpose() if s else N
    return M, N


def relative_weyl_group(
    G: GaloisDatum,
    m: AnisotropicMarking,
    path: WeylPath | str = WeylPath.DIRECT,
    config: HeckeConfig | None = None,
) -> RelativeWeylGroup:
    """W(G,S) as matrices on the relative lattice, computed as a stabiliser.

    ``direct``: elements of W(G,T) stabilising X_*(S), modulo those acting trivially.
    ``dual``: elements of W^Γ stabilising ℤΔ₀∨, acting on X_*(T)/ℤΔ₀∨.
    """
    cfg = config or HeckeConfig()
    path = WeylPath(path)
    check_marking(G, m)
    D = G.base
    rel = restricted_root_system(G, m)
    basis = rel.basis
    d0 = set(m.delta0)
    d0_positions = [k for k, i in enumerate(D.simple_indices) if i in d0]
    elements: list[IntegerMatrix] = []
    coelements: list[IntegerMatrix] = []
    reps: list[WeylGroupElement] = []
    seen: set[IntegerMatrix] = set()
    for w in weyl_group_elements(D, cfg.max_elements):
        if path is WeylPath.DIRECT:
            action = _action_matrices(basis, w)
        else:
            if any(g @ w.matrix != w.matrix @ g for g in G.generators):
                continue
            if any(
                any(c for k, c in enumerate(D.coefficients[w.perm[i]]) if k not in d0_positions)
                for i in m.delta0
            ):
                continue
            action = _quotient_action(basis, [D.coroots[i] for i in m.delta0], w)
        if action is None:
            continue
        M, N = action
        if M in seen:
            continue
        seen.add(M)
        elements.append(M)
        coelements.append(N)
        reps.append(w)
    roots = set(rel.roots)
    for M in elements:
        if {M.apply(r) for r in roots} != roots:
            raise GaloisActionError("relative Weyl element does not stabilise the restricted roots", witness={"matrix": M.to_list()})
    log.debug("relative Weyl group (%s path) has order %d", path.value, len(elements))
    return RelativeWeylGroup(tuple(elements), tuple(coelements), tuple(reps), path)


def relative_reflections(G: GaloisDatum, m: AnisotropicMarking) -> list[WeylGroupElement]:
    """w_{Δ₀∪O}·w_{Δ₀} for each Γ-orbit O of Δ∖Δ₀, as absolute Weyl elements."""
    D = G.base
    rel = restricted_root_system(G, m)
    pos = {i: k for k, i in enumerate(D.simple_indices)}
    w0 = longest_element(D, [pos[i] for i in m.delta0])
    out = []
    for orb in rel.orbits:
        wl = longest_element(D, [pos[i] for i in set(m.delta0) | set(orb)])
        out.append(
            WeylGroupElement(wl.matrix @ w0.matrix, wl.word + w0.word, wl.comatrix @ w0.comatrix, tuple(wl.perm[j] for j in w0.perm))
        )
    return out


def check_generation(G: GaloisDatum, m: AnisotropicMarking, W: RelativeWeylGroup) -> bool:
    """Whether the relative simple reflections generate W."""
    rel = restricted_root_system(G, m)
    gens = []
    for w in relative_reflections(G, m):
        action = _action_matrices(rel.basis, w)
        if action is None:
            return False
        gens.append(action[0])
    s = rel.rank
    ident = IntegerMatrix.identity(s)
    closure = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                p = h @ g
                if p not in closure:
                    closure.add(p)
                    nxt.append(p)
        frontier = nxt
    return closure == W.as_set
