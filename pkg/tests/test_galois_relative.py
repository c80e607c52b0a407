#!/usr/bin/env python3

import unittest

from unipotent_hecke.catalog import builtin_group
from unipotent_hecke.errors import GaloisActionError
from unipotent_hecke.galois_relative import (
    AnisotropicMarking,
    WeylPath,
    check_generation,
    galois_datum,
    relative_weyl_group,
    restricted_root_system,
)
from unipotent_hecke.integer_modules import IntegerMatrix
from unipotent_hecke.root_datum import split_datum


def _galois(name):
    spec = builtin_group(name)
    return spec.galois(), spec.marking()


class GaloisDatumTest(unittest.TestCase):
    def test_split_has_trivial_action(self):
        G, _ = _galois("SL3")
        self.assertEqual(G.order, 1)
        self.assertEqual(G.orbit(0), (0,))

    def test_unitary_flip_orbits(self):
        G, _ = _galois("SU4")
        self.assertEqual(G.order, 2)
        self.assertEqual(G.orbit(0), (0, 2))
        self.assertEqual(G.orbit(1), (1,))

    def test_generator_must_stabilise_simple_roots(self):
        D = split_datum("A2", "sc")
        minus = IntegerMatrix.from_rows([[-1, 0], [0, -1]], 2)
        with self.assertRaises(GaloisActionError):
            galois_datum(D, [minus])

    def test_delta0_must_be_stable(self):
        G, _ = _galois("SU3")
        with self.assertRaises(GaloisActionError):
            restricted_root_system(G, AnisotropicMarking((0,)))


class RestrictedRootsTest(unittest.TestCase):
    def test_split_restriction_is_faithful(self):
        G, m = _galois("Sp4")
        rel = restricted_root_system(G, m)
        self.assertEqual(rel.rank, 2)
        self.assertEqual(len(rel.roots), 8)
        self.assertTrue(rel.is_reduced)

    def test_su3_is_non_reduced(self):
        G, m = _galois("SU3")
        rel = restricted_root_system(G, m)
        self.assertEqual(rel.rank, 1)
        self.assertFalse(rel.is_reduced)
        self.assertEqual(len(rel.roots), 4)
        self.assertEqual(sorted(rel.multiplicity(r) for r in rel.roots), [1, 1, 2, 2])

    def test_su4_has_rank_two(self):
        G, m = _galois("SU4")
        rel = restricted_root_system(G, m)
        self.assertEqual(rel.rank, 2)
        self.assertTrue(rel.is_reduced)
        self.assertEqual(len(rel.orbits), 2)

    def test_anisotropic_has_rank_zero(self):
        G, m = _galois("ANISO_PGL3")
        rel = restricted_root_system(G, m)
        self.assertEqual(rel.rank, 0)
        self.assertEqual(rel.roots, ())


class RelativeWeylTest(unittest.TestCase):
    def test_orders_agree_on_both_paths(self):
        expected = {"SL2": 2, "SL3": 6, "Sp4": 8, "G2": 12, "SU3": 2, "SU4": 8, "ANISO_PGL3": 1}
        for name, order in expected.items():
            G, m = _galois(name)
            direct = relative_weyl_group(G, m, WeylPath.DIRECT)
            via_dual = relative_weyl_group(G, m, "dual")
            self.assertEqual(direct.order, order, name)
            self.assertEqual(direct.as_set, via_dual.as_set, name)

    def test_generated_by_relative_reflections(self):
        for name in ("SL3", "SU3", "SU4", "G2"):
            G, m = _galois(name)
            W = relative_weyl_group(G, m)
            self.assertTrue(check_generation(G, m, W), name)


if __name__ == "__main__":
    unittest.main()
