#!/usr/bin/env python3
"""Based root data, their Weyl groups, standard Levi sub-data and adjoint quotients."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import permutations
from math import factorial
from typing import Iterable, Sequence

from .errors import AxiomViolation, EnumerationCapExceeded
from .integer_modules import IntegerMatrix, Vector, cokernel, dot, rational_solve

log = logging.getLogger(__name__)

DEFAULT_WEYL_CAP = 50000

_EXCEPTIONAL_ORDERS = {"E6": 51840, "E7": 2903040, "E8": 696729600, "F4": 1152, "G2": 12}


@dataclass(frozen=True)
class BasedRootDatum:
    rank: int
    roots: tuple[Vector, ...]
    coroots: tuple[Vector, ...]
    simple_indices: tuple[int, ...]
    name: str = field(default="", compare=False)

    @cached_property
    def root_index(self) -> dict[Vector, int]:
        return {r: i for i, r in enumerate(self.roots)}

    @property
    def simple_roots(self) -> list[Vector]:
        return [self.roots[i] for i in self.simple_indices]

    @property
    def simple_coroots(self) -> list[Vector]:
        return [self.coroots[i] for i in self.simple_indices]

    @property
    def semisimple_rank(self) -> int:
        return len(self.simple_indices)

    def cartan_matrix(self) -> IntegerMatrix:
        n = len(self.simple_indices)
        return IntegerMatrix.from_rows(
            [[dot(self.roots[self.simple_indices[j]], self.coroots[self.simple_indices[i]]) for j in range(n)] for i in range(n)],
            n,
        )

    def reflection_matrix(self, i: int) -> IntegerMatrix:
        """s_α on X*: x ↦ x − ⟨x, α∨⟩α, for root index i."""
        a, c = self.roots[i], self.coroots[i]
        n = self.rank
        return IntegerMatrix.from_rows([[(1 if r == s else 0) - a[r] * c[s] for s in range(n)] for r in range(n)], n)

    def coreflection_matrix(self, i: int) -> IntegerMatrix:
        """s_α on X_*: y ↦ y − ⟨α, y⟩α∨."""
        a, c = self.roots[i], self.coroots[i]
        n = self.rank
        return IntegerMatrix.from_rows([[(1 if r == s else 0) - c[r] * a[s] for s in range(n)] for r in range(n)], n)

    def reflect(self, i: int, x: Sequence[int]) -> Vector:
        k = dot(x, self.coroots[i])
        return tuple(xi - k * ai for xi, ai in zip(x, self.roots[i]))

    def coreflect(self, i: int, y: Sequence[int]) -> Vector:
        k = dot(self.roots[i], y)
        return tuple(yi - k * ci for yi, ci in zip(y, self.coroots[i]))

    @cached_property
    def coefficients(self) -> tuple[tuple[int, ...], ...]:
        """Coordinates of every root in the simple roots (sign axiom assumed)."""
        cols = self.simple_roots
        out = []
        for r in self.roots:
            sol = rational_solve(cols, r) if cols else None
            if sol is None or any(not x.is_integer for x in sol):
                raise AxiomViolation("root is not an integral combination of the simple roots", code="sign", witness={"root": list(r)})
            out.append(tuple(int(x) for x in sol))
        return tuple(out)

    @cached_property
    def positive_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.coefficients) if all(x >= 0 for x in c))

    def is_positive(self, i: int) -> bool:
        return all(x >= 0 for x in self.coefficients[i])

    def height(self, i: int) -> int:
        return sum(self.coefficients[i])

    @cached_property
    def reflection_permutations(self) -> tuple[tuple[int, ...], ...]:
        """Permutation of root indices induced by each simple reflection."""
        perms = []
        for i in self.simple_indices:
            perms.append(tuple(self.root_index[self.reflect(i, r)] for r in self.roots))
        return tuple(perms)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "roots": [list(r) for r in self.roots],
            "coroots": [list(c) for c in self.coroots],
            "simple_indices": list(self.simple_indices),
        }


@dataclass(frozen=True)
class Classification:
    ok: bool
    cartan_matrix: IntegerMatrix
    types: tuple[str, ...]
    components: tuple[tuple[int, ...], ...]

    @property
    def weyl_order(self) -> int:
        n = 1
        for t in self.types:
            n *= weyl_order(t)
        return n


@dataclass(frozen=True)
class WeylGroupElement:
    matrix: IntegerMatrix
    word: tuple[int, ...]
    comatrix: IntegerMatrix = field(compare=False)
    perm: tuple[int, ...] = field(compare=False)

    def __len__(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class RootDatumMorphism:
    lattice_map: IntegerMatrix
    root_index_map: tuple[tuple[int, int], ...]
    index: int = 1
    central_rank: int = 0

    def to_dict(self) -> dict:
        return {
            "lattice_map": self.lattice_map.to_list(),
            "root_index_map": [list(p) for p in self.root_index_map],
            "index": self.index,
            "central_rank": self.central_rank,
        }


def torus_datum(rank: int, name: str = "") -> BasedRootDatum:
    return BasedRootDatum(rank, (), (), (), name or f"T{rank}")


CARTAN_MATRICES = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "A3": ((2, -1, 0), (-1, 2, -1), (0, -1, 2)),
    "B2": ((2, -1), (-2, 2)),
    "C2": ((2, -2), (-1, 2)),
    "G2": ((2, -3), (-1, 2)),
}


def _positive_pairs(cartan: Sequence[Sequence[int]]) -> list[tuple[Vector, Vector]]:
    """Positive roots and their coroots, both in simple coordinates, by reflection closure."""
    n = len(cartan)
    unit = [tuple(1 if i == k else 0 for i in range(n)) for k in range(n)]
    pairs = {u: u for u in unit}
    queue = deque(unit)
    while queue:
        beta = queue.popleft()
        gamma = pairs[beta]
        for i in range(n):
            k = sum(beta[j] * cartan[i][j] for j in range(n))
            kc = sum(gamma[j] * cartan[j][i] for j in range(n))
            image = tuple(b - (k if j == i else 0) for j, b in enumerate(beta))
            coimage = tuple(g - (kc if j == i else 0) for j, g in enumerate(gamma))
            if all(x >= 0 for x in image) and any(image) and image not in pairs:
                pairs[image] = coimage
                queue.append(image)
    return sorted(pairs.items(), key=lambda p: (sum(p[0]), tuple(-x for x in p[0])))


def split_datum(type_label: str, lattice: str = "sc", name: str = "") -> BasedRootDatum:
    """Simply connected (X* = weights) or adjoint (X* = ℤΔ) datum of a rank ≤ 3 type in CARTAN_MATRICES."""
    if type_label not in CARTAN_MATRICES:
        raise ValueError(f"no built-in Cartan matrix for {type_label}")
    if lattice not in ("sc", "adjoint"):
        raise ValueError(f"lattice must be 'sc' or 'adjoint', got {lattice!r}")
    C = CARTAN_MATRICES[type_label]
    n = len(C)
    roots: list[Vector] = []
    coroots: list[Vector] = []
    for beta, gamma in _positive_pairs(C):
        if lattice == "adjoint":
            r = beta
            c = tuple(sum(gamma[m] * C[m][j] for m in range(n)) for j in range(n))
        else:
            r = tuple(sum(beta[m] * C[j][m] for m in range(n)) for j in range(n))
            c = gamma
        roots.append(r)
        coroots.append(c)
    positive = len(roots)
    roots += [tuple(-x for x in r) for r in roots[:positive]]
    coroots += [tuple(-x for x in c) for c in coroots[:positive]]
    return BasedRootDatum(n, tuple(roots), tuple(coroots), tuple(range(n)), name or f"{type_label}_{lattice}")


def weyl_order(type_label: str) -> int:
    family, n = type_label[0], int(type_label[1:])
    if type_label in _EXCEPTIONAL_ORDERS:
        return _EXCEPTIONAL_ORDERS[type_label]
    if family == "A":
        return factorial(n + 1)
    if family in "BC":
        return 2**n * factorial(n)
    if family == "D":
        return 2 ** (n - 1) * factorial(n)
    raise ValueError(f"unknown type {type_label}")


def _check_axioms(D: BasedRootDatum) -> None:
    if len(D.roots) != len(D.coroots):
        raise AxiomViolation("roots and coroots differ in number", code="shape")
    for v in D.roots + D.coroots:
        if len(v) != D.rank:
            raise AxiomViolation("vector of the wrong length", code="shape", witness={"vector": list(v), "rank": D.rank})
    if len(set(D.simple_indices)) != len(D.simple_indices) or any(not 0 <= i < len(D.roots) for i in D.simple_indices):
        raise AxiomViolation("simple indices must be distinct root indices", code="shape", witness=list(D.simple_indices))
    if len(set(D.roots)) != len(D.roots):
        raise AxiomViolation("repeated root", code="shape")
    for i, (a, c) in enumerate(zip(D.roots, D.coroots)):
        if dot(a, c) != 2:
            raise AxiomViolation(
                "pairing axiom: <a, a^v> must be 2",
                code="pairing axiom",
                witness={"root_index": i, "root": list(a), "coroot": list(c), "pairing": dot(a, c)},
            )
    index = D.root_index
    for i, (a, c) in enumerate(zip(D.roots, D.coroots)):
        neg = tuple(-x for x in a)
        j = index.get(neg)
        if j is None or D.coroots[j] != tuple(-x for x in c):
            raise AxiomViolation("negation: -a must be a root with coroot -a^v", code="negation", witness={"root": list(a)})
        if tuple(2 * x for x in a) in index:
            raise AxiomViolation("system is not reduced", code="reduced", witness={"root": list(a)})
    coindex = {c: i for i, c in enumerate(D.coroots)}
    for i in range(len(D.roots)):
        for j, (b, bc) in enumerate(zip(D.roots, D.coroots)):
            image = D.reflect(i, b)
            k = index.get(image)
            if k is None:
                raise AxiomViolation(
                    "reflection closure: image of a root is missing",
                    code="reflection closure",
                    witness={"reflection": list(D.roots[i]), "root": list(b), "image": list(image)},
                )
            if coindex.get(D.coreflect(i, bc)) != k:
                raise AxiomViolation(
                    "reflection closure: coroot image does not match",
                    code="reflection closure",
                    witness={"reflection": list(D.roots[i]), "coroot": list(bc)},
                )
    try:
        coeffs = D.coefficients
    except AxiomViolation:
        raise
    except ValueError as exc:
        raise AxiomViolation("simple roots are linearly dependent", code="sign", witness=str(exc)) from exc
    for r, c in zip(D.roots, coeffs):
        if not (all(x >= 0 for x in c) or all(x <= 0 for x in c)):
            raise AxiomViolation("sign: root has mixed-sign simple coordinates", code="sign", witness={"root": list(r), "coefficients": list(c)})


def dynkin_components(cartan: IntegerMatrix) -> list[tuple[int, ...]]:
    n = cartan.rows
    seen: set[int] = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in range(n):
                if j not in seen and cartan.entries[i][j]:
                    seen.add(j)
                    queue.append(j)
        comps.append(tuple(sorted(comp)))
    return comps


def _classify_component(cartan: IntegerMatrix, comp: Sequence[int]) -> str:
    n = len(comp)
    if n == 1:
        return "A1"
    edges = {}
    for a in comp:
        for b in comp:
            if a < b and cartan.entries[a][b]:
                edges[(a, b)] = cartan.entries[a][b] * cartan.entries[b][a]
    if len(edges) != n - 1:
        raise AxiomViolation("Dynkin diagram is not a tree", code="classification", witness=list(comp))
    degree = {i: 0 for i in comp}
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    mults = sorted(edges.values())
    if mults[-1] == 3:
        if n != 2:
            raise AxiomViolation("triple edge outside rank 2", code="classification", witness=list(comp))
        return "G2"
    if mults[-1] > 3:
        raise AxiomViolation("edge of finite type expected", code="classification", witness=list(comp))

    def is_long(i: int, j: int) -> bool:
        return abs(cartan.entries[j][i]) == 2

    doubles = [e for e, m in edges.items() if m == 2]
    if len(doubles) > 1:
        raise AxiomViolation("two double edges", code="classification", witness=list(comp))
    if doubles:
        if max(degree.values()) > 2:
            raise AxiomViolation("branched diagram with a double edge", code="classification", witness=list(comp))
        a, b = doubles[0]
        if n == 2:
            first = comp[0]
            other = b if first == a else a
            return f"B{n}" if is_long(first, other) else f"C{n}"
        ends = [i for i in (a, b) if degree[i] == 1]
        if not ends:
            if n == 4:
                return "F4"
            raise AxiomViolation("double edge in the middle of a long chain", code="classification", witness=list(comp))
        end = ends[0]
        other = b if end == a else a
        return f"C{n}" if is_long(end, other) else f"B{n}"
    branch = [i for i in comp if degree[i] == 3]
    if not branch:
        if max(degree.values()) > 2:
            raise AxiomViolation("unexpected vertex degree", code="classification", witness=list(comp))
        return f"A{n}"
    if len(branch) > 1 or max(degree.values()) > 3:
        raise AxiomViolation("diagram is not of finite type", code="classification", witness=list(comp))
    center = branch[0]
    adjacency = {i: [j for j in comp if j != i and cartan.entries[i][j]] for i in comp}
    arms = []
    for start in adjacency[center]:
        length, prev, cur = 1, center, start
        while True:
            nxt = [j for j in adjacency[cur] if j != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        arms.append(length)
    arms.sort()
    if arms[0] == 1 and arms[1] == 1:
        return f"D{n}"
    if arms[:2] == [1, 2] and arms[2] in (2, 3, 4):
        return f"E{n}"
    raise AxiomViolation("diagram is not of finite type", code="classification", witness=list(comp))


def validate_and_classify(D: BasedRootDatum) -> Classification:
    """Check every root-datum axiom and classify the Dynkin components.

    Raises AxiomViolation naming the first failed axiom with a witness.
    """
    _check_axioms(D)
    cartan = D.cartan_matrix()
    comps = dynkin_components(cartan)
    types = tuple(_classify_component(cartan, c) for c in comps)
    log.debug("classified %s as %s", D.name or "datum", types)
    return Classification(True, cartan, types, tuple(comps))


def dual(D: BasedRootDatum) -> BasedRootDatum:
    name = D.name[5:-1] if D.name.startswith("dual(") else f"dual({D.name})" if D.name else ""
    return BasedRootDatum(D.rank, D.coroots, D.roots, D.simple_indices, name)


@lru_cache(maxsize=128)
def _enumerate_weyl(D: BasedRootDatum, cap: int) -> tuple[WeylGroupElement, ...]:
    estimate = validate_and_classify(D).weyl_order
    if estimate > cap:
        raise EnumerationCapExceeded(
            f"Weyl group of order {estimate} exceeds the cap {cap}",
            witness={"estimated_order": estimate, "cap": cap},
        )
    simple_mats = [D.reflection_matrix(i) for i in D.simple_indices]
    simple_comats = [D.coreflection_matrix(i) for i in D.simple_indices]
    perms = D.reflection_permutations
    ident = IntegerMatrix.identity(D.rank)
    start = WeylGroupElement(ident, (), ident, tuple(range(len(D.roots))))
    seen = {start.perm: start}
    order = [start]
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for k in range(len(simple_mats)):
            perm = tuple(w.perm[j] for j in perms[k])
            if perm in seen:
                continue
            elt = WeylGroupElement(w.matrix @ simple_mats[k], w.word + (k,), w.comatrix @ simple_comats[k], perm)
            seen[perm] = elt
            order.append(elt)
            queue.append(elt)
    log.debug("enumerated %d Weyl group elements", len(order))
    return tuple(order)


def weyl_group_elements(D: BasedRootDatum, cap: int = DEFAULT_WEYL_CAP) -> list[WeylGroupElement]:
    """All of W by breadth-first closure; words are lexicographically smallest reduced words."""
    return list(_enumerate_weyl(D, cap))


def length(D: BasedRootDatum, w: WeylGroupElement) -> int:
    return sum(1 for i in D.positive_indices if not D.is_positive(w.perm[i]))


def longest_element(D: BasedRootDatum, positions: Iterable[int]) -> WeylGroupElement:
    """Longest element of the parabolic subgroup on the given simple positions."""
    pos = sorted(set(positions))
    ident = IntegerMatrix.identity(D.rank)
    w = WeylGroupElement(ident, (), ident, tuple(range(len(D.roots))))
    perms = D.reflection_permutations
    while True:
        for k in pos:
            if D.is_positive(w.perm[D.simple_indices[k]]):
                w = WeylGroupElement(
                    w.matrix @ D.reflection_matrix(D.simple_indices[k]),
                    w.word + (k,),
                    w.comatrix @ D.coreflection_matrix(D.simple_indices[k]),
                    tuple(w.perm[j] for j in perms[k]),
                )
                break
        else:
            return w


def standard_levi_datum(D: BasedRootDatum, I: Iterable[int]) -> BasedRootDatum:
    """Sub-datum with roots ℤI ∩ Φ; I is given as root indices of simple roots."""
    chosen = set(I)
    if not chosen <= set(D.simple_indices):
        raise ValueError(f"{sorted(chosen)} is not a subset of the simple indices {list(D.simple_indices)}")
    support = [k for k, i in enumerate(D.simple_indices) if i in chosen]
    keep = [i for i, c in enumerate(D.coefficients) if all(c[k] == 0 for k in range(len(c)) if k not in support)]
    renumber = {old: new for new, old in enumerate(keep)}
    simple = tuple(renumber[i] for i in D.simple_indices if i in chosen)
    label = ",".join(str(i) for i in sorted(chosen))
    return BasedRootDatum(
        D.rank,
        tuple(D.roots[i] for i in keep),
        tuple(D.coroots[i] for i in keep),
        simple,
        f"{D.name}[{label}]" if D.name else f"levi[{label}]",
    )


def adjoint_datum(D: BasedRootDatum) -> tuple[BasedRootDatum, RootDatumMorphism]:
    """Datum on the lattice ℤΔ (simple roots as basis) and the comparison map ℤΔ → X*."""
    n = len(D.simple_indices)
    simple = D.simple_indices
    roots = tuple(D.coefficients)
    coroots = tuple(tuple(dot(D.roots[j], c) for j in simple) for c in D.coroots)
    base = D.name[:-3] if D.name.endswith("_ad") else D.name
    D_ad = BasedRootDatum(n, roots, coroots, tuple(simple), f"{base}_ad" if base else "adjoint")
    lattice_map = IntegerMatrix.from_columns(D.simple_roots, D.rank) if n else IntegerMatrix.zeros(D.rank, 0)
    coker = cokernel(lattice_map).group
    torsion = 1
    for d in coker.torsion_invariants:
        torsion *= d
    morphism = RootDatumMorphism(
        lattice_map,
        tuple((i, i) for i in range(len(D.roots))),
        index=torsion,
        central_rank=coker.free_rank,
    )
    return D_ad, morphism


def isomorphism_under(D1: BasedRootDatum, D2: BasedRootDatum, phi: IntegerMatrix) -> dict[int, int] | None:
    """Root index map if the lattice map phi: X*(D1) → X*(D2) is a based isomorphism."""
    if phi.rows != D2.rank or phi.cols != D1.rank or not phi.is_unimodular():
        return None
    co = phi.inverse().transpose()
    mapping: dict[int, int] = {}
    for i, (a, c) in enumerate(zip(D1.roots, D1.coroots)):
        j = D2.root_index.get(phi.apply(a))
        if j is None or D2.coroots[j] != co.apply(c):
            return None
        mapping[i] = j
    if {mapping[i] for i in D1.simple_indices} != set(D2.simple_indices):
        return None
    return mapping


def match_based_root_data(D1: BasedRootDatum, D2: BasedRootDatum) -> RootDatumMorphism | None:
    """Isomorphism of semisimple based root data, searched over simple-root bijections."""
    if D1.rank != D2.rank or len(D1.simple_indices) != len(D2.simple_indices) or len(D1.roots) != len(D2.roots):
        return None
    if len(D1.simple_indices) != D1.rank:
        raise ValueError("match_based_root_data needs semisimple data; pass a lattice map to isomorphism_under")
    c1, c2 = D1.cartan_matrix(), D2.cartan_matrix()
    n = len(D1.simple_indices)
    if n == 0:
        phi = IntegerMatrix.identity(0)
        return RootDatumMorphism(phi, ())
    for sigma in permutations(range(n)):
        if any(c1.entries[i][j] != c2.entries[sigma[i]][sigma[j]] for i in range(n) for j in range(n)):
            continue
        target = [D2.simple_roots[sigma[k]] for k in range(n)]
        columns = []
        for e in range(D1.rank):
            unit = tuple(1 if t == e else 0 for t in range(D1.rank))
            coords = rational_solve(D1.simple_roots, unit)
            col = [sum(coords[k] * target[k][r] for k in range(n)) for r in range(D1.rank)]
            if any(not x.is_integer for x in col):
                break
            columns.append(tuple(int(x) for x in col))
        else:
            phi = IntegerMatrix.from_columns(columns, D1.rank)
            mapping = isomorphism_under(D1, D2, phi)
            if mapping is not None:
                return RootDatumMorphism(phi, tuple(sorted(mapping.items())))
    return None
