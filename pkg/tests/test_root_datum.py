#!/usr/bin/env python3

import unittest

from unipotent_hecke.errors import AxiomViolation, EnumerationCapExceeded
from unipotent_hecke.root_datum import (
    BasedRootDatum,
    adjoint_datum,
    dual,
    dynkin_components,
    isomorphism_under,
    length,
    longest_element,
    match_based_root_data,
    split_datum,
    standard_levi_datum,
    torus_datum,
    validate_and_classify,
    weyl_group_elements,
    weyl_order,
)
from unipotent_hecke.integer_modules import IntegerMatrix


class SplitDatumTest(unittest.TestCase):
    def test_weyl_orders(self):
        self.assertEqual(len(weyl_group_elements(split_datum("A1", "sc"))), 2)
        self.assertEqual(len(weyl_group_elements(split_datum("A2", "sc"))), 6)
        self.assertEqual(len(weyl_group_elements(split_datum("C2", "sc"))), 8)
        self.assertEqual(len(weyl_group_elements(split_datum("G2", "sc"))), 12)
        self.assertEqual(len(weyl_group_elements(split_datum("A3", "adjoint"))), 24)

    def test_root_counts_and_simple_first(self):
        D = split_datum("B2", "adjoint")
        self.assertEqual(len(D.roots), 8)
        self.assertEqual(D.simple_indices, (0, 1))
        self.assertEqual(D.coefficients[0], (1, 0))
        self.assertEqual(D.coefficients[1], (0, 1))

    def test_classification(self):
        self.assertEqual(validate_and_classify(split_datum("A2", "sc")).types, ("A2",))
        self.assertIn(validate_and_classify(split_datum("C2", "sc")).types[0], {"B2", "C2"})
        self.assertEqual(validate_and_classify(split_datum("G2", "sc")).types, ("G2",))

    def test_unknown_type(self):
        with self.assertRaises(ValueError):
            split_datum("E8")
        with self.assertRaises(ValueError):
            split_datum("A1", "weird")

    def test_weyl_order_table(self):
        self.assertEqual(weyl_order("A3"), 24)
        self.assertEqual(weyl_order("B3"), 48)
        self.assertEqual(weyl_order("D4"), 192)
        self.assertEqual(weyl_order("F4"), 1152)


class AxiomTest(unittest.TestCase):
    def test_pairing_violation(self):
        bad = BasedRootDatum(1, ((1,), (-1,)), ((1,), (-1,)), (0,), "bad")
        with self.assertRaises(AxiomViolation) as ctx:
            validate_and_classify(bad)
        self.assertEqual(ctx.exception.code, "pairing axiom")
        self.assertEqual(ctx.exception.witness["pairing"], 1)

    def test_non_reduced_rejected(self):
        bad = BasedRootDatum(
            1,
            ((1,), (-1,), (2,), (-2,)),
            ((2,), (-2,), (1,), (-1,)),
            (0,),
        )
        with self.assertRaises(AxiomViolation) as ctx:
            validate_and_classify(bad)
        self.assertEqual(ctx.exception.code, "reduced")

    def test_missing_negative(self):
        bad = BasedRootDatum(1, ((2,),), ((1,),), (0,))
        with self.assertRaises(AxiomViolation) as ctx:
            validate_and_classify(bad)
        self.assertEqual(ctx.exception.code, "negation")

    def test_torus_is_valid(self):
        cls = validate_and_classify(torus_datum(2))
        self.assertEqual(cls.types, ())
        self.assertEqual(cls.weyl_order, 1)


class DualityTest(unittest.TestCase):
    def test_dual_is_involutive(self):
        for label in ("A1", "A2", "C2", "G2"):
            D = split_datum(label, "sc")
            self.assertEqual(dual(dual(D)), D)

    def test_dual_of_adjoint_is_simply_connected(self):
        self.assertIsNotNone(match_based_root_data(split_datum("A2", "sc"), dual(split_datum("A2", "adjoint"))))

    def test_b2_and_c2_exchange_under_duality(self):
        morph = match_based_root_data(dual(split_datum("B2", "adjoint")), split_datum("C2", "sc"))
        self.assertIsNotNone(morph)

    def test_sl2_and_pgl2_are_not_isomorphic(self):
        self.assertIsNone(match_based_root_data(split_datum("A1", "sc"), split_datum("A1", "adjoint")))

    def test_isomorphism_under_identity(self):
        D = split_datum("A2", "adjoint")
        mapping = isomorphism_under(D, D, IntegerMatrix.identity(2))
        self.assertEqual(mapping, {i: i for i in range(len(D.roots))})


class StructureTest(unittest.TestCase):
    def test_adjoint_index(self):
        _, morph = adjoint_datum(split_datum("A1", "sc"))
        self.assertEqual(morph.index, 2)
        _, morph = adjoint_datum(split_datum("A2", "sc"))
        self.assertEqual(morph.index, 3)
        _, morph = adjoint_datum(split_datum("A1", "adjoint"))
        self.assertEqual(morph.index, 1)

    def test_longest_element_length(self):
        D = split_datum("A2", "sc")
        w0 = longest_element(D, [0, 1])
        self.assertEqual(len(w0), 3)
        self.assertEqual(length(D, w0), 3)

    def test_levi_subdatum(self):
        D = split_datum("A2", "sc")
        L = standard_levi_datum(D, [0])
        self.assertEqual(len(L.roots), 2)
        self.assertEqual(validate_and_classify(L).types, ("A1",))

    def test_dynkin_components_split(self):
        cartan = IntegerMatrix.from_rows([[2, 0], [0, 2]], 2)
        self.assertEqual(dynkin_components(cartan), [(0,), (1,)])

    def test_enumeration_cap(self):
        with self.assertRaises(EnumerationCapExceeded):
            weyl_group_elements(split_datum("A3", "sc"), cap=10)


if __name__ == "__main__":
    unittest.main()
