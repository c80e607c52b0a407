#!/usr/bin/env python3
"""Bernstein components on both sides and their matching.

The p-adic side comes from facets of the Iwahori–Weyl group; the Galois side
from relevant dual Levi classes. ψ-labels on both sides are written as the
values of a character of π1(G) on a common finite subgroup Ψ∨ ⊂ π1(G), so
the two families can be compared and twisted by the same weakly unramified
characters.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import reduce as fold
from itertools import product
from typing import Any, Iterable, Mapping, Sequence

from sympy import Rational, ilcm

from .affine_weyl import FacetData, IwahoriWeylDatum, analyze_facet, facet_root_datum
from .config import HeckeConfig
from .errors import AffineModelError, ConsistencyError, ParameterError
from .galois_relative import AnisotropicMarking, GaloisDatum, WeylPath, relative_weyl_group, restricted_root_system
from .hecke import AffineHeckeDatum, FacetHecke, UnitCharacter, build_from_facet, hecke_datum, twist_by_character
from .integer_modules import (
    Cokernel,
    FinGenAbelianGroup,
    FixedQuotient,
    IntegerMatrix,
    Vector,
    cokernel,
    dot,
    fixed_quotient,
    rational_solve,
    solve_integer,
)
from .levi_dual import DualLeviClass, LeviClass, classify_dual_levis, dual_levi_bijection
from .root_datum import BasedRootDatum, torus_datum, weyl_group_elements

log = logging.getLogger(__name__)

IWAHORI = "iwahori"


@dataclass(frozen=True)
class ComponentEntry:
    """One catalog line: a facet with its cuspidal id, exponents and optional Galois-side table data."""

    J: tuple[int, ...] = ()
    cuspidal_id: str = IWAHORI
    exponents: tuple[tuple[int, int], ...] | None = None
    levi: tuple[int, ...] | None = None
    galois: Mapping[str, Any] | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "J": list(self.J),
            "cuspidal_id": self.cuspidal_id,
            "exponents": {str(k): v for k, v in self.exponents} if self.exponents is not None else None,
            "levi": list(self.levi) if self.levi is not None else None,
        }


# -- π1(G) and weakly unramified characters -------------------------------------------


def fundamental_group(G: GaloisDatum) -> Cokernel:
    """π1(G) = X_*(T)/ℤΦ∨ with canonical coordinates."""
    D = G.base
    if not D.simple_indices:
        return cokernel(IntegerMatrix.zeros(D.rank, 0))
    return cokernel(IntegerMatrix.from_columns(D.simple_coroots, D.rank))


@dataclass(frozen=True)
class WeaklyUnramifiedGroup:
    group: FinGenAbelianGroup
    realization: FixedQuotient = field(repr=False)

    def to_dict(self) -> dict:
        return {"group": self.group.to_dict(), "label": self.group.label}


def weakly_unramified_group(G: GaloisDatum) -> WeaklyUnramifiedGroup:
    """X_wr(G), modelled by its character group π1(G)^Fr."""
    D = G.base
    Fco = G.coweight_action(G.frobenius())
    fq = fixed_quotient(Fco, D.simple_coroots)
    log.debug("weakly unramified group of %s: %s", D.name, fq.quotient.group.label)
    return WeaklyUnramifiedGroup(fq.quotient.group, fq)


def _exponent(P: Cokernel) -> int:
    return fold(ilcm, [d for d in P.moduli if d], 1)


def character_value(P: Cokernel, a: Sequence[int], element: Sequence[int]) -> int:
    """Value of the character ``a`` of tors(π1) at a π1 element, as a numerator over the exponent of P."""
    L = _exponent(P)
    if L == 1:
        return 0
    return sum(ai * ci * (L // d) for ai, ci, d in zip(a, element, P.moduli) if d) % L


def torsion_characters(P: Cokernel) -> list[tuple[int, ...]]:
    ranges = [range(d) if d else range(1) for d in P.moduli]
    return [tuple(a) for a in product(*ranges)]


def psi_labels(P: Cokernel, elements: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Distinct restrictions of π1 characters to ``elements``; one per character of the subgroup they form."""
    seen = {tuple(character_value(P, a, e) for e in elements) for a in torsion_characters(P)}
    return sorted(seen)


def twist_label(P: Cokernel, z: Sequence[int], elements: Sequence[Sequence[int]], psi: Sequence[int]) -> tuple[int, ...]:
    L = _exponent(P)
    if L == 1:
        return tuple(psi)
    return tuple((p + character_value(P, z, e)) % L for p, e in zip(psi, elements))


def levi_psi_elements(G: GaloisDatum, levi: Sequence[int]) -> tuple[Vector, ...]:
    """Image of tors(X_*(T)/ℤI∨) in π1(G)."""
    D = G.base
    P = fundamental_group(G)
    cols = [D.coroots[i] for i in levi]
    C = cokernel(IntegerMatrix.from_columns(cols, D.rank) if cols else IntegerMatrix.zeros(D.rank, 0))
    return tuple(sorted({P.reduce(C.lift(t)) for t in C.torsion_elements()}))


def omega_to_pi1(D: IwahoriWeylDatum, P: Cokernel, cls: Sequence[int]) -> Vector:
    """Ω → π1(G): lift to Λ, go to X_*(T), reduce modulo the coroots."""
    return P.reduce(D.lattice.to_ambient(D.omega_cokernel.lift(cls)))


# -- Galois side -----------------------------------------------------------------------


@dataclass(frozen=True)
class DualBernsteinComponent:
    levi: DualLeviClass
    cuspidal_id: str
    lattice_basis: tuple[Vector, ...]
    datum: AffineHeckeDatum
    weyl: tuple[IntegerMatrix, ...]
    psi_elements: tuple[Vector, ...]
    psi: tuple[int, ...]

    @property
    def key(self) -> tuple:
        return (self.levi.representative, self.cuspidal_id, self.psi)

    def to_dict(self) -> dict:
        return {
            "levi": self.levi.to_dict(),
            "cuspidal_id": self.cuspidal_id,
            "torus_lattice": [list(v) for v in self.lattice_basis],
            "weyl_order": len(self.weyl),
            "datum": self.datum.to_dict(),
            "psi_elements": [list(e) for e in self.psi_elements],
            "psi": list(self.psi),
        }


def _iwahori_dual_datum(G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig) -> tuple[tuple[Vector, ...], AffineHeckeDatum, tuple[IntegerMatrix, ...]]:
    """Torus X_*(T)^Fr with roots the Frobenius norms of coroots and coroots the restricted roots."""
    D = G.base
    rel = restricted_root_system(G, m)
    basis = tuple(rel.basis)
    n = D.rank
    B = IntegerMatrix.from_columns(basis, n) if basis else IntegerMatrix.zeros(n, 0)
    coweight = [G.coweight_action(g) for g in G.group_elements]

    def norm(i: int) -> tuple[Vector, int]:
        orbit = {g.apply(D.coroots[i]) for g in coweight}
        total = [0] * n
        for c in orbit:
            total = [a + b for a, b in zip(total, c)]
        coords = solve_integer(B, total)
        if coords is None:
            raise ConsistencyError("Frobenius norm of a coroot is not in the fixed lattice", witness={"coroot": list(D.coroots[i])})
        return coords, len(orbit)

    candidates: dict[Vector, set[Vector]] = defaultdict(set)
    for i in range(len(D.roots)):
        img = rel.images[i]
        if any(img):
            candidates[norm(i)[0]].add(img)
    restricted: dict[Vector, Vector] = {}
    for coords, imgs in candidates.items():
        # a norm shared by a and 2a pairs with 2a
        paired = [img for img in imgs if dot(coords, img) == 2]
        if len(paired) != 1:
            raise AffineModelError("no unique coroot for a norm of coroots", witness={"norm": list(coords), "images": sorted(map(list, imgs))})
        restricted[coords] = paired[0]
    roots = sorted(restricted)
    simple = []
    labels = []
    stars = []
    for orb in rel.orbits:
        coords, _ = norm(orb[0])
        simple.append(roots.index(coords))
        a = rel.images[orb[0]]
        big, small = rel.multiplicity(a), rel.multiplicity(tuple(2 * x for x in a))
        labels.append(big + small)
        stars.append(big - small)
    rd = BasedRootDatum(len(basis), tuple(roots), tuple(restricted[r] for r in roots), tuple(simple), f"dual_iwahori({D.name})")
    datum = hecke_datum(rd, labels, stars, name=rd.name)
    W = relative_weyl_group(G, m, WeylPath.DUAL, config)
    weyl = {w.matrix for w in weyl_group_elements(rd, config.max_elements)}
    if weyl != set(W.coelements):
        raise ConsistencyError(
            "stabiliser in the relative Weyl group differs from the Weyl group of the dual roots",
            witness={"stabiliser": W.order, "weyl": len(weyl)},
        )
    return basis, datum, tuple(W.coelements)


def _central_dual_datum(G: GaloisDatum) -> tuple[tuple[Vector, ...], AffineHeckeDatum, tuple[IntegerMatrix, ...]]:
    """Levi = G: no roots, lattice the free part of π1(G)^Fr."""
    fq = weakly_unramified_group(G).realization
    q = fq.quotient
    free = [k for k, d in enumerate(q.moduli) if d == 0]
    basis = []
    for k in free:
        coords = [0] * len(q.moduli)
        coords[k] = 1
        basis.append(fq.to_ambient(q.lift(coords)))
    datum = hecke_datum(torus_datum(len(basis), f"central({G.base.name})"), [])
    return tuple(basis), datum, (IntegerMatrix.identity(len(basis)),)


def _table_dual_datum(entry: Mapping[str, Any], config: HeckeConfig) -> tuple[tuple[Vector, ...], AffineHeckeDatum, tuple[IntegerMatrix, ...]]:
    try:
        basis = tuple(tuple(int(x) for x in v) for v in entry["lattice"])
        rd = BasedRootDatum(
            len(basis),
            tuple(tuple(int(x) for x in r) for r in entry["roots"]),
            tuple(tuple(int(x) for x in c) for c in entry["coroots"]),
            tuple(int(i) for i in entry["simple"]),
            str(entry.get("name", "table")),
        )
        labels = [int(x) for x in entry["labels"]]
        stars = [int(x) for x in entry.get("star_labels", labels)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed Galois-side table entry: {exc}") from exc
    datum = hecke_datum(rd, labels, stars, name=rd.name)
    weyl = tuple(w.matrix for w in weyl_group_elements(rd, config.max_elements))
    return basis, datum, weyl


def build_dual_component(
    G: GaloisDatum,
    m: AnisotropicMarking,
    levi: DualLeviClass,
    cuspidal_id: str = IWAHORI,
    table: Mapping[str, Any] | None = None,
    psi: Sequence[int] | None = None,
    config: HeckeConfig | None = None,
) -> DualBernsteinComponent:
    """Torus, W_{s∨}, Φ_{s∨} and labels of one Galois-side component."""
    cfg = config or HeckeConfig()
    if not levi.relevant:
        raise ValueError(f"dual Levi {list(levi.representative)} is not relevant")
    I = tuple(levi.representative)
    everything = tuple(sorted(G.base.simple_indices))
    if table is not None:
        basis, datum, weyl = _table_dual_datum(table, cfg)
    elif I == everything:
        basis, datum, weyl = _central_dual_datum(G)
    elif I == tuple(sorted(m.delta0)) and cuspidal_id == IWAHORI:
        basis, datum, weyl = _iwahori_dual_datum(G, m, cfg)
    else:
        raise ParameterError(
            "no table entry for this dual Levi and cuspidal id",
            witness={"levi": list(I), "cuspidal_id": cuspidal_id},
        )
    elements = levi_psi_elements(G, I)
    label = tuple(psi) if psi is not None else tuple(0 for _ in elements)
    return DualBernsteinComponent(levi, cuspidal_id, basis, datum, weyl, elements, label)


def galois_components(
    G: GaloisDatum, m: AnisotropicMarking, entries: Iterable[ComponentEntry], config: HeckeConfig | None = None
) -> list[DualBernsteinComponent]:
    """Every Galois-side component of the catalog entries, one per ψ."""
    cfg = config or HeckeConfig()
    P = fundamental_group(G)
    relevant = {c.representative: c for c in classify_dual_levis(G, m, cfg) if c.relevant}
    minimal = tuple(sorted(m.delta0))
    out = []
    for entry in entries:
        rep = tuple(entry.levi) if entry.levi is not None else minimal
        if rep not in relevant:
            raise ParameterError("entry names a Levi that is not a relevant class representative", witness={"levi": list(rep)})
        elements = levi_psi_elements(G, rep)
        for label in psi_labels(P, elements):
            out.append(build_dual_component(G, m, relevant[rep], entry.cuspidal_id, entry.galois, label, cfg))
    log.info("built %d Galois-side components for %s", len(out), G.base.name)
    return out


# -- p-adic side -----------------------------------------------------------------------


@dataclass(frozen=True)
class PadicComponent:
    J: tuple[int, ...]
    cuspidal_id: str
    levi: LeviClass
    datum: AffineHeckeDatum
    xf_ambient: tuple[tuple[Rational, ...], ...]
    psi_elements: tuple[Vector, ...]
    psi: tuple[int, ...]
    facet_hecke: FacetHecke = field(compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "J": list(self.J),
            "cuspidal_id": self.cuspidal_id,
            "levi": self.levi.to_dict(),
            "Xf": [[str(x) for x in v] for v in self.xf_ambient],
            "datum": self.datum.to_dict(),
            "omega_f": self.facet_hecke.omega_f.to_dict(),
            "psi_elements": [list(e) for e in self.psi_elements],
            "psi": list(self.psi),
        }


def xf_in_ambient(D: IwahoriWeylDatum, f: FacetData) -> tuple[tuple[Rational, ...], ...]:
    basis = D.relative_roots.basis
    n = D.galois.base.rank
    out = []
    for v in f.Xf:
        amb = [Rational(0)] * n
        for c, b in zip(v, basis):
            amb = [a + c * x for a, x in zip(amb, b)]
        out.append(tuple(amb))
    return tuple(out)


def padic_components(
    D: IwahoriWeylDatum, entries: Iterable[ComponentEntry], config: HeckeConfig | None = None
) -> list[PadicComponent]:
    cfg = config or HeckeConfig()
    P = fundamental_group(D.galois)
    out = []
    for entry in entries:
        f = facet_root_datum(D, analyze_facet(D, entry.J, cfg), cfg)
        exps = dict(entry.exponents) if entry.exponents is not None else None
        fh = build_from_facet(D, f, exps, cfg)
        classes = set(f.Omega_f_tor) | {tuple(0 for _ in D.omega_cokernel.moduli)}
        elements = tuple(sorted({omega_to_pi1(D, P, cls) for cls in classes}))
        if len(elements) != len(classes):
            raise ConsistencyError("Omega_f_tor does not embed in pi1(G)", witness={"J": list(f.J)})
        labels = psi_labels(P, elements)
        if len(labels) != len(fh.data):
            raise ConsistencyError("psi-decomposition sizes differ", witness={"J": list(f.J), "labels": len(labels), "data": len(fh.data)})
        xf = xf_in_ambient(D, f)
        for label in labels:
            out.append(PadicComponent(f.J, entry.cuspidal_id, f.levi, fh.datum, xf, elements, label, fh))
    log.info("built %d p-adic components for %s", len(out), D.name)
    return out


# -- matching -------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentMatch:
    padic: PadicComponent
    galois: DualBernsteinComponent
    torus_iso: IntegerMatrix
    weyl_iso: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "padic": {"J": list(self.padic.J), "cuspidal_id": self.padic.cuspidal_id, "psi": list(self.padic.psi)},
            "galois": {
                "levi": list(self.galois.levi.representative),
                "cuspidal_id": self.galois.cuspidal_id,
                "psi": list(self.galois.psi),
            },
            "torus_iso": self.torus_iso.to_list(),
            "weyl_iso": [list(p) for p in self.weyl_iso],
        }


def torus_isomorphism(p: PadicComponent, g: DualBernsteinComponent) -> IntegerMatrix:
    """Matrix taking X_f coordinates to torus-lattice coordinates through X_*(T) ⊗ ℚ."""
    r = len(p.xf_ambient)
    if r != len(g.lattice_basis):
        raise ConsistencyError("tori of matched components differ in rank", witness={"padic": r, "galois": len(g.lattice_basis)})
    if r == 0:
        return IntegerMatrix.identity(0)
    cols = []
    for v in p.xf_ambient:
        c = rational_solve(g.lattice_basis, v)
        if c is None or any(not x.is_integer for x in c):
            raise ConsistencyError("X_f is not inside the Galois-side torus lattice", witness={"vector": [str(x) for x in v]})
        cols.append(tuple(int(x) for x in c))
    M = IntegerMatrix.from_columns(cols, r)
    if not M.is_unimodular():
        raise ConsistencyError("torus lattices differ", witness={"index": abs(M.det())})
    return M


def weyl_isomorphism(p: PadicComponent, g: DualBernsteinComponent, phi: IntegerMatrix) -> tuple[tuple[int, int], ...]:
    """w ↦ φ w φ⁻¹ from W(R_f) onto W_{s∨}; checked to be a bijection."""
    target = {M: j for j, M in enumerate(g.weyl)}
    inv = phi.inverse()
    pairs = []
    for i, w in enumerate(p.datum.weyl):
        image = phi @ w.matrix @ inv
        if image not in target:
            raise ConsistencyError("transported Weyl element is not in W_s", witness={"matrix": w.matrix.to_list()})
        pairs.append((i, target[image]))
    if len({j for _, j in pairs}) != len(g.weyl) or len(pairs) != len(g.weyl):
        raise ConsistencyError("Weyl groups of matched components differ", witness={"padic": len(pairs), "galois": len(g.weyl)})
    return tuple(pairs)


def _keys(padic: Sequence[PadicComponent], galois: Sequence[DualBernsteinComponent], pairing: Mapping[tuple, tuple]):
    left = defaultdict(list)
    for p in padic:
        left[(pairing[p.levi.representative], p.cuspidal_id, p.psi)].append(p)
    right = defaultdict(list)
    for g in galois:
        right[g.key].append(g)
    return left, right


def levi_pairing(G: GaloisDatum, m: AnisotropicMarking, config: HeckeConfig | None = None) -> dict[tuple, tuple]:
    return {lc.representative: dc.representative for lc, dc in dual_levi_bijection(G, m, config)}


def match_components(
    padic: Sequence[PadicComponent],
    galois: Sequence[DualBernsteinComponent],
    pairing: Mapping[tuple, tuple],
) -> list[ComponentMatch]:
    """Pair components by (dual Levi, cuspidal id, ψ); every key must occur once on each side."""
    left, right = _keys(padic, galois, pairing)
    for key in sorted(set(left) | set(right)):
        if len(left.get(key, ())) != 1 or len(right.get(key, ())) != 1:
            raise ConsistencyError(
                "component counts differ",
                witness={
                    "levi": list(key[0]),
                    "cuspidal_id": key[1],
                    "psi": list(key[2]),
                    "padic": len(left.get(key, ())),
                    "galois": len(right.get(key, ())),
                },
            )
    out = []
    for key in sorted(left):
        p, g = left[key][0], right[key][0]
        phi = torus_isomorphism(p, g)
        out.append(ComponentMatch(p, g, phi, weyl_isomorphism(p, g, phi)))
    return out


def _ambient_character(P: Cokernel, z: Sequence[int], vectors: Sequence[Sequence]) -> UnitCharacter | None:
    L = _exponent(P)
    exps = []
    for v in vectors:
        if any(not Rational(x).is_integer for x in v):
            return None
        exps.append(character_value(P, z, P.reduce(tuple(int(x) for x in v))) if L > 1 else 0)
    return UnitCharacter(L, tuple(exps))


def check_twist_equivariance(
    matches: Sequence[ComponentMatch],
    G: GaloisDatum,
    config: HeckeConfig | None = None,
) -> dict:
    """Twisting by weakly unramified characters commutes with matching, on labels and on the algebras."""
    cfg = config or HeckeConfig()
    P = fundamental_group(G)
    by_key = {(m.galois.levi.representative, m.galois.cuspidal_id, m.galois.psi): m for m in matches}
    for m in matches:
        if m.padic.psi_elements != m.galois.psi_elements:
            raise ConsistencyError(
                "matched components carry different psi subgroups",
                witness={"padic": [list(e) for e in m.padic.psi_elements], "galois": [list(e) for e in m.galois.psi_elements]},
            )
    characters = torsion_characters(P)
    algebra_checks = 0
    for z in characters:
        for m in matches:
            tp = twist_label(P, z, m.padic.psi_elements, m.padic.psi)
            tg = twist_label(P, z, m.galois.psi_elements, m.galois.psi)
            partner = by_key.get((m.galois.levi.representative, m.galois.cuspidal_id, tg))
            if tp != tg or partner is None or partner.padic.psi != tp or partner.padic.J != m.padic.J:
                raise ConsistencyError(
                    "twisting does not commute with matching",
                    witness={"character": list(z), "padic": list(tp), "galois": list(tg)},
                )
            zp = _ambient_character(P, z, m.padic.xf_ambient)
            zg = _ambient_character(P, z, m.galois.lattice_basis)
            if zp is None or zg is None:
                continue
            for k in range(m.torus_iso.cols):
                if zg.value(m.torus_iso.column(k)) != zp.value(tuple(int(i == k) for i in range(m.torus_iso.cols))):
                    raise ConsistencyError("twist does not commute with the torus isomorphism", witness={"character": list(z)})
            twist_by_character(m.padic.datum, zp, cfg)
            twist_by_character(m.galois.datum, zg, cfg)
            algebra_checks += 1
    log.debug("twist equivariance verified for %d characters", len(characters))
    return {"characters": len(characters), "matches": len(matches), "algebra_checks": algebra_checks}


def check_kottwitz(G: GaloisDatum, D: IwahoriWeylDatum) -> dict:
    """|X_wr(G)| against |Ω|."""
    xwr = weakly_unramified_group(G).group
    omega = D.omega
    return {"xwr": xwr.to_dict(), "omega": omega.to_dict(), "equal": xwr == omega}
