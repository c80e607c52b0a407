#!/usr/bin/env python3
"""Levi subgroups up to conjugacy, their Langlands-dual counterparts, and relevance."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .config import HeckeConfig
from .errors import ConsistencyError
from .galois_relative import (
    AnisotropicMarking,
    GaloisDatum,
    WeylPath,
    check_marking,
    relative_weyl_group,
    restricted_root_system,
)
from .integer_modules import Vector, rational_solve
from .root_datum import BasedRootDatum, weyl_group_elements

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LeviClass:
    representative: tuple[int, ...]
    orbit_members: tuple[tuple[int, ...], ...]
    relative_orbit: tuple[tuple[Vector, ...], ...]

    @property
    def parabolic_count(self) -> int:
        """Standard parabolics with a Levi factor in this class."""
        return len(self.orbit_members)

    def to_dict(self) -> dict:
        return {
            "representative": list(self.representative),
            "orbit_members": [list(m) for m in self.orbit_members],
            "relative_orbit": [[list(v) for v in s] for s in self.relative_orbit],
            "parabolic_count": self.parabolic_count,
        }


@dataclass(frozen=True)
class DualLeviClass:
    representative: tuple[int, ...]
    relevant: bool
    members: tuple[tuple[int, ...], ...] = ()

    def to_dict(self) -> dict:
        return {"representative": list(self.representative), "relevant": self.relevant, "members": [list(m) for m in self.members]}


def stable_subsets(G: GaloisDatum, lower: Iterable[int] = ()) -> list[tuple[int, ...]]:
    """Γ-stable subsets of Δ containing ``lower``, sorted."""
    D = G.base
    base = set(lower)
    orbits = []
    seen = set(base)
    for i in D.simple_indices:
        if i not in seen:
            orb = G.orbit(i)
            seen.update(orb)
            orbits.append(orb)
    out = []
    for k in range(len(orbits) + 1):
        for chosen in combinations(orbits, k):
            subset = set(base)
            for orb in chosen:
                subset.update(orb)
            out.append(tuple(sorted(subset)))
    return sorted(set(out))


def _relative_image(G: GaloisDatum, m: AnisotropicMarking, I: Sequence[int]) -> frozenset[Vector]:
    rel = restricted_root_system(G, m)
    return frozenset(rel.images[i] for i in I if i not in set(m.delta0))


def classify_levis(G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig | None = None) -> list[LeviClass]:
    check_marking(G, m)
    W = relative_weyl_group(G, m, WeylPath.DIRECT, config)
    subsets = stable_subsets(G, m.delta0)
    images = {I: _relative_image(G, m, I) for I in subsets}
    assigned: dict[tuple[int, ...], int] = {}
    classes: list[list[tuple[int, ...]]] = []
    orbits: list[list[frozenset[Vector]]] = []
    for I in subsets:
        if I in assigned:
            continue
        orbit = []
        for M in W.elements:
            img = frozenset(M.apply(v) for v in images[I])
            if img not in orbit:
                orbit.append(img)
        members = [J for J in subsets if images[J] in orbit]
        for J in members:
            assigned[J] = len(classes)
        classes.append(members)
        orbits.append(orbit)
    out = []
    for members, orbit in zip(classes, orbits):
        out.append(
            LeviClass(
                min(members),
                tuple(sorted(members)),
                tuple(sorted(tuple(sorted(s)) for s in orbit)),
            )
        )
    out.sort(key=lambda c: (len(c.representative), c.representative))
    log.debug("found %d Levi classes", len(out))
    return out


def _subsystem(D: BasedRootDatum, I: Sequence[int]) -> frozenset[int]:
    support = {k for k, i in enumerate(D.simple_indices) if i in set(I)}
    return frozenset(
        r for r, c in enumerate(D.coefficients) if all(x == 0 for k, x in enumerate(c) if k not in support)
    )


def classify_dual_levis(G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig | None = None) -> list[DualLeviClass]:
    """Γ-stable standard L-Levi subgroups up to association.

    Relevant ones (containing Δ₀∨) are associated under the stabiliser of
    ℤΔ₀∨ in W^Γ; the others under all of W^Γ.
    """
    cfg = config or HeckeConfig()
    D = G.base
    stab = relative_weyl_group(G, m, WeylPath.DUAL, cfg).representatives
    invariant = [w for w in weyl_group_elements(D, cfg.max_elements) if all(g @ w.matrix == w.matrix @ g for g in G.generators)]
    d0 = set(m.delta0)
    subsets = stable_subsets(G)
    systems = {I: _subsystem(D, I) for I in subsets}
    assigned: set[tuple[int, ...]] = set()
    out = []
    for I in subsets:
        if I in assigned:
            continue
        relevant = d0 <= set(I)
        group = stab if relevant else invariant
        images = {frozenset(w.perm[r] for r in systems[I]) for w in group}
        members = tuple(J for J in subsets if systems[J] in images and (d0 <= set(J)) == relevant)
        assigned.update(members)
        out.append(DualLeviClass(min(members), relevant, members))
    out.sort(key=lambda c: (len(c.representative), c.representative))
    return out


def dual_levi_bijection(
    G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig | None = None
) -> list[tuple[LeviClass, DualLeviClass]]:
    """Pair each Levi class with the dual class of I∨ and certify the pairing is bijective."""
    levis = classify_levis(G, m, config)
    duals = [c for c in classify_dual_levis(G, m, config) if c.relevant]
    if len(levis) != len(duals):
        raise ConsistencyError(
            "Levi classes and relevant dual Levi classes differ in number",
            witness={"levi_classes": len(levis), "relevant_dual_classes": len(duals)},
        )
    pairs = []
    used: set[tuple[int, ...]] = set()
    for lc in levis:
        hits = [dc for dc in duals if set(lc.orbit_members) & set(dc.members)]
        if len(hits) != 1 or hits[0].representative in used:
            raise ConsistencyError("dual classification does not biject", witness={"levi": list(lc.representative)})
        used.add(hits[0].representative)
        pairs.append((lc, hits[0]))
    return pairs


def levi_class_of_relative(
    G: GaloisDatum, m: AnisotropicMarking, relative_roots: Iterable[Sequence[int]], config: HeckeConfig | None = None
) -> LeviClass:
    """Levi class whose relative root subsystem is W(G,S)-conjugate to the given one."""
    target = frozenset(tuple(r) for r in relative_roots)
    rel = restricted_root_system(G, m)
    W = relative_weyl_group(G, m, WeylPath.DIRECT, config)
    for lc in classify_levis(G, m, config):
        I = set(lc.representative)
        span = _relative_span(rel.roots, [rel.images[i] for i in I if i not in set(m.delta0)])
        for M in W.elements:
            if frozenset(M.apply(v) for v in span) == target:
                return lc
    raise ConsistencyError("no standard Levi matches the subsystem", witness=[list(v) for v in sorted(target)])


def _relative_span(roots: Sequence[Vector], simple: Sequence[Vector]) -> frozenset[Vector]:
    if not simple:
        return frozenset()
    out = set()
    distinct = list(dict.fromkeys(simple))
    for r in roots:
        if rational_solve(distinct, r) is not None:
            out.add(r)
    return frozenset(out)
