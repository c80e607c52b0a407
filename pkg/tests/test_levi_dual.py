#!/usr/bin/env python3

import unittest

from unipotent_hecke.catalog import builtin_group
from unipotent_hecke.errors import ConsistencyError
from unipotent_hecke.levi_dual import (
    classify_dual_levis,
    classify_levis,
    dual_levi_bijection,
    levi_class_of_relative,
    stable_subsets,
)


def _galois(name):
    spec = builtin_group(name)
    return spec.galois(), spec.marking()


class LeviClassesTest(unittest.TestCase):
    def test_sl3_has_three_classes(self):
        G, m = _galois("SL3")
        classes = classify_levis(G, m)
        self.assertEqual(len(classes), 3)
        self.assertEqual([c.representative for c in classes], [(), (0,), (0, 1)])
        self.assertEqual(classes[1].parabolic_count, 2)

    def test_sp4_separates_short_and_long(self):
        G, m = _galois("Sp4")
        classes = classify_levis(G, m)
        self.assertEqual(len(classes), 4)
        self.assertTrue(all(c.parabolic_count == 1 for c in classes))

    def test_unitary_subsets_are_orbit_unions(self):
        G, m = _galois("SU4")
        self.assertEqual(stable_subsets(G), [(), (0, 1, 2), (0, 2), (1,)])
        self.assertEqual(len(classify_levis(G, m)), 4)

    def test_anisotropic_has_one_class(self):
        G, m = _galois("ANISO_PGL3")
        classes = classify_levis(G, m)
        self.assertEqual(len(classes), 1)
        self.assertEqual(classes[0].representative, (0, 1))


class DualLeviTest(unittest.TestCase):
    def test_relevant_classes_match_levi_classes(self):
        for name in ("SL3", "Sp4", "G2", "SU4", "ANISO_PGL3"):
            G, m = _galois(name)
            relevant = [c for c in classify_dual_levis(G, m) if c.relevant]
            self.assertEqual(len(relevant), len(classify_levis(G, m)), name)

    def test_anisotropic_has_irrelevant_classes(self):
        G, m = _galois("ANISO_PGL3")
        classes = classify_dual_levis(G, m)
        self.assertEqual(len(classes), 3)
        self.assertEqual([c.representative for c in classes if c.relevant], [(0, 1)])

    def test_bijection_pairs_every_class(self):
        G, m = _galois("SL3")
        pairs = dual_levi_bijection(G, m)
        self.assertEqual(len(pairs), 3)
        self.assertEqual({lc.representative for lc, _ in pairs}, {dc.representative for _, dc in pairs})


class RelativeSubsystemTest(unittest.TestCase):
    def test_empty_subsystem_is_minimal_levi(self):
        G, m = _galois("SL3")
        self.assertEqual(levi_class_of_relative(G, m, []).representative, ())

    def test_unknown_subsystem_raises(self):
        G, m = _galois("SL3")
        with self.assertRaises(ConsistencyError):
            levi_class_of_relative(G, m, [(7, 7)])


if __name__ == "__main__":
    unittest.main()
