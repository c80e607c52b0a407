#!/usr/bin/env python3

import unittest

from unipotent_hecke.catalog import BUILTIN_NAMES, builtin_group, list_builtins, load_group
from unipotent_hecke.root_datum import validate_and_classify


class CatalogTest(unittest.TestCase):
    def test_every_builtin_validates(self):
        for name in BUILTIN_NAMES:
            spec = builtin_group(name)
            validate_and_classify(spec.root_datum())
            self.assertEqual(spec.name, name)
            spec.galois()

    def test_types(self):
        self.assertEqual(validate_and_classify(builtin_group("SU4").root_datum()).types, ("A3",))
        self.assertEqual(validate_and_classify(builtin_group("GL2").root_datum()).types, ("A1",))
        self.assertEqual(builtin_group("GL2").rank, 2)
        self.assertEqual(validate_and_classify(builtin_group("GL2xGL1").root_datum()).types, ("A1",))
        self.assertEqual(builtin_group("GL2xGL1").rank, 3)

    def test_load_builtin(self):
        self.assertIs(load_group("builtin:PGL3"), builtin_group("PGL3"))
        with self.assertRaises(ValueError):
            load_group("builtin:E8")

    def test_listing(self):
        names = [g["name"] for g in list_builtins()]
        self.assertEqual(names, list(BUILTIN_NAMES))
        aniso = next(g for g in list_builtins() if g["name"] == "ANISO_PGL3")
        self.assertEqual(aniso["delta0"], [0, 1])


if __name__ == "__main__":
    unittest.main()
