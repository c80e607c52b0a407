#!/usr/bin/env python3

import unittest
from itertools import combinations

from unipotent_hecke.affine_weyl import (
    analyze_facet,
    build_iwahori_weyl,
    check_af_omega_facet,
    check_af_omega_factorization,
    check_center_torsion,
    facet_root_datum,
)
from unipotent_hecke.catalog import builtin_group
from unipotent_hecke.errors import FacetConstructionError
from unipotent_hecke.hecke import build_from_facet, default_exponents
from unipotent_hecke.root_datum import validate_and_classify


def _iwahori_weyl(name):
    spec = builtin_group(name)
    return build_iwahori_weyl(spec.galois(), spec.marking())


class IwahoriWeylTest(unittest.TestCase):
    def test_omega_orders(self):
        self.assertEqual(_iwahori_weyl("SL2").omega.order, 1)
        self.assertEqual(_iwahori_weyl("PGL2").omega.order, 2)
        self.assertEqual(_iwahori_weyl("PGL3").omega.order, 3)
        self.assertEqual(_iwahori_weyl("Sp4").omega.order, 1)

    def test_node_labels(self):
        self.assertEqual(_iwahori_weyl("SL2").node_labels, (0, 1))
        self.assertEqual(_iwahori_weyl("SL3").node_labels, (0, 1, 2))

    def test_simple_reflections_are_involutions(self):
        D = _iwahori_weyl("SL3")
        for label in D.node_labels:
            s = D.simple_reflection(label)
            self.assertEqual(D.length(s), 1)
            self.assertEqual(D.compose(s, s), D.identity)

    def test_reduced_word_rebuilds_element(self):
        D = _iwahori_weyl("PGL2")
        for g in D.elements_in_box(2):
            word, omega = D.reduced_word(g)
            rebuilt = D.multiply(*[D.simple_reflection(i) for i in word], omega)
            self.assertEqual(rebuilt, g)
            self.assertEqual(D.length(omega), 0)

    def test_factor_af_omega(self):
        D = _iwahori_weyl("PGL2")
        g = D.translation_element((1,))
        word, omega = D.factor_af_omega(g)
        self.assertEqual(len(word), D.length(g))
        self.assertEqual(D.class_of(omega), D.class_of(g))
        self.assertEqual(omega, D.omega_element(D.class_of(g)))

    def test_factorization_reaches_every_omega_class(self):
        out = check_af_omega_factorization(_iwahori_weyl("PGL2"), 2)
        self.assertEqual(out["omega_classes"], 2)
        self.assertEqual(out["elements"], 10)

    def test_non_reduced_walls_use_doubled_roots(self):
        D = _iwahori_weyl("SU3")
        self.assertEqual(D.node_labels, (0, 1))
        self.assertEqual(D.omega.order, 1)
        self.assertEqual(D.simple_gradients, ((2,),))
        self.assertEqual(D.node(1).gradient, (2,))
        self.assertEqual(D.node(0).constant, 1)

    def test_non_reduced_exponents(self):
        D = _iwahori_weyl("SU3")
        f = facet_root_datum(D, analyze_facet(D, ()))
        self.assertEqual(f.S_f, (1,))
        self.assertEqual(validate_and_classify(f.Rf).types, ("A1",))
        self.assertEqual(default_exponents(D, f), {0: 1, 1: 3})
        datum = build_from_facet(D, f).data[0][1]
        self.assertEqual(datum.labels, (3,))
        self.assertEqual(datum.star_labels, (1,))


class FacetTest(unittest.TestCase):
    def test_iwahori_facet_of_sl2(self):
        D = _iwahori_weyl("SL2")
        f = facet_root_datum(D, analyze_facet(D, ()))
        self.assertEqual([lab for lab, _ in f.S_f_af], [0, 1])
        self.assertEqual(f.S_f, (1,))
        self.assertEqual(f.dropped, (0,))
        self.assertEqual(validate_and_classify(f.Rf).types, ("A1",))
        self.assertTrue(check_center_torsion(f))

    def test_rank_chain(self):
        for name in ("SL3", "Sp4"):
            D = _iwahori_weyl(name)
            f = facet_root_datum(D, analyze_facet(D, ()))
            self.assertEqual(len(f.S_f), len(f.XJ), name)
            self.assertEqual(f.certificates["rank_chain"], len(f.S_f), name)
            self.assertEqual(len(f.S_f_af), len(D.node_labels), name)

    def test_every_proper_facet(self):
        failures = {}
        for name in ("SL2", "PGL2", "SL3", "Sp4", "SO5"):
            D = _iwahori_weyl(name)
            labels = D.node_labels
            bad = []
            for size in range(len(labels)):
                for J in combinations(labels, size):
                    try:
                        f = facet_root_datum(D, analyze_facet(D, J))
                    except FacetConstructionError:
                        bad.append(J)
                        continue
                    self.assertEqual(f.certificates["rank_chain"], len(f.S_f), (name, J))
                    self.assertEqual(len(f.S_f), len(f.XJ), (name, J))
                    self.assertTrue(check_center_torsion(f), (name, J))
            failures[name] = bad
        self.assertEqual(failures["SL3"], [(0,), (1,), (2,)])
        for name in ("SL2", "PGL2", "Sp4", "SO5"):
            self.assertEqual(failures[name], [], name)

    def test_pgl2_omega_is_not_torsion_on_iwahori(self):
        D = _iwahori_weyl("PGL2")
        f = analyze_facet(D, ())
        self.assertEqual([c for c in f.Omega_f_tor if any(c)], [])
        self.assertEqual(len(f.Omega_f), 1)

    def test_facet_factorization(self):
        D = _iwahori_weyl("PGL2")
        f = facet_root_datum(D, analyze_facet(D, ()))
        out = check_af_omega_facet(D, f, 3)
        self.assertEqual(out["Omega_f_sample"], 2)
        self.assertEqual(out["products"], out["W_af_J_ball"] * 2)

    def test_a2_tilde_single_node_has_no_involution(self):
        D = _iwahori_weyl("SL3")
        with self.assertRaises(FacetConstructionError):
            analyze_facet(D, (0,))

    def test_whole_component_rejected(self):
        D = _iwahori_weyl("SL2")
        with self.assertRaises(ValueError):
            analyze_facet(D, (0, 1))
        with self.assertRaises(ValueError):
            analyze_facet(D, (5,))


if __name__ == "__main__":
    unittest.main()
