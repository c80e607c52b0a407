#!/usr/bin/env python3
"""Comparison harness: p-adic against Galois-side Hecke data, adjoint invariance, catalog sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from sympy import Rational

from .affine_weyl import FacetData, IwahoriWeylDatum, analyze_facet, build_iwahori_weyl, facet_root_datum
from .catalog import BUILTIN_NAMES, builtin_group
from .components import (
    ComponentMatch,
    check_kottwitz,
    check_twist_equivariance,
    galois_components,
    levi_pairing,
    match_components,
    padic_components,
    xf_in_ambient,
)
from .config import HeckeConfig
from .errors import AffineModelError, HeckeToolError
from .galois_relative import galois_datum
from .group_spec import GroupSpec
from .hecke import AffineHeckeDatum, default_exponents
from .integer_modules import IntegerMatrix, cokernel, rational_solve
from .root_datum import adjoint_datum, isomorphism_under, match_based_root_data, validate_and_classify

log = logging.getLogger(__name__)

HALF = Rational(1, 2)
COXETER_CAP = 12


class Verdict(str, Enum):
    ISOMORPHIC = "isomorphic"
    MISMATCH = "mismatch"


@dataclass(frozen=True)
class ComparisonReport:
    group: str
    component: dict
    verdict: Verdict
    based_root_datum_iso: dict
    parameter_check: tuple[dict, ...]
    v_assignment: str | None
    omega_part: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == Verdict.ISOMORPHIC

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "component": self.component,
            "verdict": self.verdict.value,
            "based_root_datum_iso": self.based_root_datum_iso,
            "parameter_check": list(self.parameter_check),
            "v_assignment": self.v_assignment,
            "omega_part": self.omega_part,
        }


def _exponent(n: int, lam: int) -> Rational | None | str:
    """v-exponent forced by q^n = v^(2 lam); None when both vanish."""
    if lam == 0:
        return None if n == 0 else "unsolvable"
    return Rational(n, 2 * lam)


def _root_quotient(D: AffineHeckeDatum) -> dict:
    cols = [D.root_datum.roots[i] for i in D.root_datum.simple_indices]
    M = IntegerMatrix.from_columns(cols, D.rank) if cols else IntegerMatrix.zeros(D.rank, 0)
    return cokernel(M).group.to_dict()


def _candidate_maps(padic: AffineHeckeDatum, galois: AffineHeckeDatum, torus_iso: IntegerMatrix | None) -> Iterable[IntegerMatrix]:
    if torus_iso is not None:
        for w in galois.weyl:
            yield w.matrix @ torus_iso
        return
    P, G = padic.root_datum, galois.root_datum
    if P.rank == G.rank and len(P.simple_indices) == P.rank:
        found = match_based_root_data(P, G)
        if found is not None:
            yield found.lattice_map
    elif P.rank == G.rank:
        yield IntegerMatrix.identity(P.rank)


def compare_hecke_algebras(
    padic: AffineHeckeDatum,
    galois: AffineHeckeDatum,
    torus_iso: IntegerMatrix | None = None,
    group: str = "",
    component: Mapping[str, Any] | None = None,
    omega_f: Mapping[str, Any] | None = None,
    expected_exponent: Rational = HALF,
) -> ComparisonReport:
    """Search a based isomorphism R_f → Φ_{s∨}, then solve v^{2λ} = q^N root by root.

    ``padic`` carries the q-exponents N (and N at the conjugate vertex) as its
    labels; ``galois`` carries the v-exponents λ, λ*. A mismatch is reported,
    never raised.
    """
    comp = dict(component or {})
    mapping = None
    phi = None
    for candidate in _candidate_maps(padic, galois, torus_iso):
        mapping = isomorphism_under(padic.root_datum, galois.root_datum, candidate)
        if mapping is not None:
            phi = candidate
            break
    omega_part = {"padic": _root_quotient(padic), "galois": _root_quotient(galois)}
    if omega_f is not None:
        omega_part["omega_f"] = dict(omega_f)
    omega_part["equal"] = omega_part["padic"] == omega_part["galois"]
    if mapping is None:
        witness = {
            "error": "no based root datum isomorphism",
            "padic_types": list(validate_and_classify(padic.root_datum).types),
            "galois_types": list(validate_and_classify(galois.root_datum).types),
            "padic_rank": padic.rank,
            "galois_rank": galois.rank,
        }
        log.warning("no based isomorphism for %s %s", group, comp)
        return ComparisonReport(group, comp, Verdict.MISMATCH, witness, (), None, omega_part)

    g_simple = list(galois.root_datum.simple_indices)
    checks = []
    exponents = set()
    all_ok = True
    for k, i in enumerate(padic.root_datum.simple_indices):
        kk = g_simple.index(mapping[i])
        e = _exponent(padic.labels[k], galois.labels[kk])
        e_star = _exponent(padic.star_labels[k], galois.star_labels[kk])
        ok = all(x is None or x == expected_exponent for x in (e, e_star))
        all_ok = all_ok and ok
        exponents.update(x for x in (e, e_star) if isinstance(x, Rational))
        checks.append(
            {
                "simple": k,
                "galois_simple": kk,
                "q_exponents": [padic.labels[k], padic.star_labels[k]],
                "v_exponents": [galois.labels[kk], galois.star_labels[kk]],
                "forced": [str(e) if e is not None else None, str(e_star) if e_star is not None else None],
                "ok": ok,
            }
        )
    v = str(next(iter(exponents))) if len(exponents) == 1 else None
    verdict = Verdict.ISOMORPHIC if all_ok and omega_part["equal"] else Verdict.MISMATCH
    iso = {"lattice_map": phi.to_list(), "root_index_map": [[a, b] for a, b in sorted(mapping.items())]}
    log.info("comparison %s %s: %s (v exponent %s)", group, comp, verdict.value, v)
    return ComparisonReport(group, comp, verdict, iso, tuple(checks), v, omega_part)


def compare_match(match: ComponentMatch, group: str = "") -> ComparisonReport:
    p, g = match.padic, match.galois
    component = {
        "J": list(p.J),
        "cuspidal_id": p.cuspidal_id,
        "psi": list(p.psi),
        "levi": list(g.levi.representative),
    }
    return compare_hecke_algebras(p.datum, g.datum, match.torus_iso, group, component, p.facet_hecke.omega_f.to_dict())


# -- whole-group runs -------------------------------------------------------------------


@dataclass(frozen=True)
class GroupComparison:
    group: str
    matches: tuple[ComponentMatch, ...]
    reports: tuple[ComparisonReport, ...]
    twist: dict
    kottwitz: dict | None

    @property
    def ok(self) -> bool:
        kott = self.kottwitz is None or self.kottwitz["equal"]
        return kott and all(r.ok for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "ok": self.ok,
            "matches": [m.to_dict() for m in self.matches],
            "reports": [r.to_dict() for r in self.reports],
            "twist_equivariance": self.twist,
            "kottwitz": self.kottwitz,
        }


def match_group(spec: GroupSpec, config: HeckeConfig | None = None) -> tuple[Any, IwahoriWeylDatum, list[ComponentMatch]]:
    cfg = config or HeckeConfig()
    G = spec.galois(cfg)
    m = spec.marking()
    D = build_iwahori_weyl(G, m, cfg)
    padic = padic_components(D, spec.components, cfg)
    galois = galois_components(G, m, spec.components, cfg)
    return G, D, match_components(padic, galois, levi_pairing(G, m, cfg))


def compare_group(spec: GroupSpec, config: HeckeConfig | None = None, J: Sequence[int] | None = None, cuspidal_id: str | None = None) -> GroupComparison:
    """Match every catalog component of ``spec`` and compare the Hecke data of each match."""
    cfg = config or HeckeConfig()
    G, D, matches = match_group(spec, cfg)
    twist = check_twist_equivariance(matches, G, cfg)
    selected = [
        mt for mt in matches
        if (J is None or mt.padic.J == tuple(sorted(J))) and (cuspidal_id is None or mt.padic.cuspidal_id == cuspidal_id)
    ]
    if not selected:
        raise ValueError(f"no matched component with J={list(J) if J is not None else None} cuspidal_id={cuspidal_id}")
    reports = tuple(compare_match(mt, spec.name) for mt in selected)
    base = G.base
    split_semisimple = G.order == 1 and not spec.delta0 and len(base.simple_indices) == base.rank
    kottwitz = check_kottwitz(G, D) if split_semisimple else None
    return GroupComparison(spec.name, tuple(selected), reports, twist, kottwitz)


def _sweep_one(name: str, config: HeckeConfig) -> dict:
    try:
        result = compare_group(builtin_group(name), config)
    except AffineModelError as exc:
        log.warning("%s: not modelled (%s)", name, exc)
        return {"group": name, "status": "unsupported", "error": exc.to_dict()}
    except HeckeToolError as exc:
        log.warning("%s: %s", name, exc)
        return {"group": name, "status": "error", "error": exc.to_dict()}
    return {"group": name, "status": "ok" if result.ok else "mismatch", "result": result.to_dict()}


def compare_catalog(names: Sequence[str] | None = None, config: HeckeConfig | None = None) -> list[dict]:
    """Iwahori comparisons over the builtin catalog, one worker per group."""
    cfg = config or HeckeConfig()
    pending = list(names or BUILTIN_NAMES)
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        results = list(pool.map(lambda n: _sweep_one(n, cfg), pending))
    log.info("catalog sweep: %d groups, %d ok", len(results), sum(r["status"] == "ok" for r in results))
    return results


# -- adjoint invariance -----------------------------------------------------------------


@dataclass(frozen=True)
class AdjointReport:
    group: str
    J: tuple[int, ...]
    checks: dict
    index: int | None
    expected_index: int
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.witness is None and all(c["equal"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "J": list(self.J),
            "ok": self.ok,
            "checks": self.checks,
            "index": self.index,
            "expected_index": self.expected_index,
            "witness": self.witness,
        }


def _coxeter_matrix(D: IwahoriWeylDatum, f: FacetData) -> list[list[int]]:
    """Orders of s_i s_j on S_{f,af}; 0 stands for infinite (beyond the cap)."""
    gens = [s for _, s in sorted(f.S_f_af)]
    out = []
    for a in gens:
        row = []
        for b in gens:
            ab = D.compose(a, b)
            x, k = ab, 1
            while x != D.identity and k <= COXETER_CAP:
                x, k = D.compose(x, ab), k + 1
            row.append(k if x == D.identity else 0)
        out.append(row)
    return out


def _facet_summary(D: IwahoriWeylDatum, f: FacetData) -> dict:
    return {
        "coxeter": _coxeter_matrix(D, f),
        "W0_order": len(f.W0_J),
        "Rf_types": list(validate_and_classify(f.Rf).types),
        "exponents": sorted(default_exponents(D, f).items()) if not f.J else None,
    }


def adjoint_group(spec: GroupSpec, config: HeckeConfig | None = None):
    """The adjoint datum with the Frobenius transported to a permutation of ℤΔ."""
    D = spec.root_datum()
    D_ad, morphism = adjoint_datum(D)
    simple = list(D.simple_indices)
    perm = [simple.index(D.root_index[spec.frobenius.apply(D.roots[i])]) for i in simple]
    n = len(simple)
    P = IntegerMatrix.from_columns([tuple(1 if r == perm[k] else 0 for r in range(n)) for k in range(n)], n)
    return galois_datum(D_ad, [P], config), morphism


def check_adjoint_invariance(spec: GroupSpec, J: Sequence[int] = (), config: HeckeConfig | None = None) -> AdjointReport:
    """Facet data of G and of its adjoint datum agree; X_f(G) sits in X_f(G_ad) with finite index."""
    cfg = config or HeckeConfig()
    G = spec.galois(cfg)
    m = spec.marking()
    G_ad, morphism = adjoint_group(spec, cfg)
    D = build_iwahori_weyl(G, m, cfg)
    D_ad = build_iwahori_weyl(G_ad, m, cfg)
    J = tuple(sorted(J))
    f = facet_root_datum(D, analyze_facet(D, J, cfg), cfg)
    f_ad = facet_root_datum(D_ad, analyze_facet(D_ad, J, cfg), cfg)
    left, right = _facet_summary(D, f), _facet_summary(D_ad, f_ad)
    checks = {k: {"group": left[k], "adjoint": right[k], "equal": left[k] == right[k]} for k in left}

    base = G.base
    simple_roots = [base.roots[i] for i in base.simple_indices]
    target = xf_in_ambient(D_ad, f_ad)
    cols = []
    witness = None
    for v in xf_in_ambient(D, f):
        image = tuple(sum(a * y for a, y in zip(alpha, v)) for alpha in simple_roots)
        coords = rational_solve(target, image) if target else None
        if coords is None or any(not Rational(x).is_integer for x in coords):
            witness = {"error": "X_f(G) does not map into X_f(G_ad)", "vector": [str(x) for x in v]}
            break
        cols.append(tuple(int(x) for x in coords))
    index = None
    if witness is None:
        if len(cols) != len(target):
            witness = {"error": "X_f ranks differ", "group": len(cols), "adjoint": len(target)}
        else:
            index = abs(IntegerMatrix.from_columns(cols, len(target)).det()) if cols else 1
            if index == 0:
                witness = {"error": "X_f(G) has infinite index in X_f(G_ad)"}
            elif morphism.central_rank == 0 and index != morphism.index:
                witness = {"error": "index differs from the order of the center character group", "index": index, "expected": morphism.index}
    report = AdjointReport(spec.name, J, checks, index, morphism.index, witness)
    if not report.ok:
        log.warning("adjoint check failed for %s J=%s: %s", spec.name, list(J), witness or checks)
    return report
