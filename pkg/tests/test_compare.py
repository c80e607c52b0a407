#!/usr/bin/env python3

import unittest

from sympy import Rational

from unipotent_hecke.catalog import builtin_group
from unipotent_hecke.compare import (
    Verdict,
    check_adjoint_invariance,
    compare_catalog,
    compare_group,
    compare_hecke_algebras,
    match_group,
)
from unipotent_hecke.hecke import hecke_datum
from unipotent_hecke.root_datum import split_datum


class CompareHeckeAlgebrasTest(unittest.TestCase):
    def test_split_groups_are_isomorphic_at_half(self):
        for name in ("SL2", "PGL2", "SL3", "PGL3", "Sp4", "G2"):
            result = compare_group(builtin_group(name))
            self.assertTrue(result.ok, name)
            for report in result.reports:
                self.assertEqual(report.verdict, Verdict.ISOMORPHIC)
                self.assertEqual(report.v_assignment, "1/2")

    def test_unitary_group_with_unequal_parameters(self):
        result = compare_group(builtin_group("SU3"))
        self.assertTrue(result.ok)
        report = result.reports[0]
        self.assertEqual(report.verdict, Verdict.ISOMORPHIC)
        self.assertEqual(report.v_assignment, "1/2")
        _, _, matches = match_group(builtin_group("SU3"))
        self.assertEqual(matches[0].padic.datum.labels, (3,))
        self.assertEqual(matches[0].galois.datum.star_labels, (1,))

    def test_groups_with_central_torus(self):
        for name in ("GL2", "GL2xGL1"):
            result = compare_group(builtin_group(name))
            self.assertTrue(result.ok, name)
            self.assertIsNone(result.kottwitz, name)
            self.assertEqual([r.v_assignment for r in result.reports], ["1/2"], name)

    def test_wrong_galois_label_is_a_mismatch(self):
        _, _, matches = match_group(builtin_group("SL2"))
        m = matches[0]
        bad = hecke_datum(m.galois.datum.root_datum, [2], [2])
        report = compare_hecke_algebras(m.padic.datum, bad, m.torus_iso, "SL2")
        self.assertEqual(report.verdict, Verdict.MISMATCH)
        self.assertFalse(report.ok)
        self.assertEqual(report.parameter_check[0]["forced"], ["1/4", "1/4"])

    def test_other_exponent_is_accepted_when_expected(self):
        _, _, matches = match_group(builtin_group("SL2"))
        m = matches[0]
        bad = hecke_datum(m.galois.datum.root_datum, [2], [2])
        report = compare_hecke_algebras(m.padic.datum, bad, m.torus_iso, expected_exponent=Rational(1, 4))
        self.assertTrue(report.ok)

    def test_non_isomorphic_root_data(self):
        report = compare_hecke_algebras(
            hecke_datum(split_datum("A1", "sc"), [1]),
            hecke_datum(split_datum("A1", "adjoint"), [1]),
        )
        self.assertEqual(report.verdict, Verdict.MISMATCH)
        self.assertEqual(report.based_root_datum_iso["error"], "no based root datum isomorphism")
        self.assertEqual(report.parameter_check, ())

    def test_unknown_facet_selection(self):
        with self.assertRaises(ValueError):
            compare_group(builtin_group("SL2"), J=(1,))


class CatalogSweepTest(unittest.TestCase):
    def test_sweep_statuses(self):
        results = {r["group"]: r for r in compare_catalog(["SL2", "PGL2", "SU3"])}
        self.assertEqual(results["SL2"]["status"], "ok")
        self.assertEqual(results["PGL2"]["status"], "ok")
        self.assertEqual(results["SU3"]["status"], "ok")


class AdjointInvarianceTest(unittest.TestCase):
    def test_indices(self):
        for name, index in (("SL2", 2), ("SL3", 3), ("PGL2", 1), ("PGL3", 1), ("Sp4", 2)):
            report = check_adjoint_invariance(builtin_group(name))
            self.assertTrue(report.ok, name)
            self.assertEqual(report.index, index, name)
            self.assertEqual(report.expected_index, index, name)

    def test_facet_summaries_agree(self):
        report = check_adjoint_invariance(builtin_group("SL3"))
        self.assertEqual(set(report.checks), {"coxeter", "W0_order", "Rf_types", "exponents"})
        self.assertEqual(report.checks["W0_order"]["group"], 6)


if __name__ == "__main__":
    unittest.main()
