#!/usr/bin/env python3

import json
import unittest
from pathlib import Path

from unipotent_hecke.catalog import BUILTIN_NAMES, builtin_group
from unipotent_hecke.compare import compare_group
from unipotent_hecke.group_spec import lookup_exponents, parse_group_spec, parse_parameter_table

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def _schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text(encoding="utf-8"))


class GroupSpecSchemaTest(unittest.TestCase):
    def test_builtins_emit_the_documented_keys(self):
        schema = _schema("group_spec")
        component = schema["$defs"]["component"]
        for name in BUILTIN_NAMES:
            out = builtin_group(name).to_dict()
            self.assertLessEqual(set(schema["required"]), set(out), name)
            self.assertLessEqual(set(out), set(schema["properties"]), name)
            for entry in out["components"]:
                self.assertLessEqual(set(entry), set(component["properties"]), name)

    def test_emitted_spec_reads_back(self):
        spec = builtin_group("SU4")
        self.assertEqual(parse_group_spec(json.dumps(spec.to_dict())).to_dict(), spec.to_dict())


class ComparisonReportSchemaTest(unittest.TestCase):
    def test_report_keys(self):
        schema = _schema("comparison_report")
        check_required = schema["properties"]["parameter_check"]["items"]["required"]
        for name in ("SL2", "SU3"):
            for report in compare_group(builtin_group(name)).reports:
                out = json.loads(json.dumps(report.to_dict()))
                self.assertLessEqual(set(schema["required"]), set(out), name)
                self.assertIn(out["verdict"], schema["properties"]["verdict"]["enum"])
                self.assertLessEqual(set(out["component"]), set(schema["properties"]["component"]["properties"]))
                for check in out["parameter_check"]:
                    self.assertLessEqual(set(check_required), set(check), name)


class ParameterTableSchemaTest(unittest.TestCase):
    def test_documented_entry_parses(self):
        entry = _schema("parameter_table")["$defs"]["entries"]["items"]
        row = {"type": "A1~", "J": [], "cuspidal_id": "iwahori", "exponents": {"0": 1, "1": 3}}
        self.assertLessEqual(set(entry["required"]), set(row))
        self.assertLessEqual(set(row), set(entry["properties"]))
        table = parse_parameter_table(json.dumps([row]))
        self.assertEqual(lookup_exponents(table, "A1~", [], "iwahori"), {0: 1, 1: 3})


if __name__ == "__main__":
    unittest.main()
