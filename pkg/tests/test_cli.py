#!/usr/bin/env python3

import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from unipotent_hecke.cli import _parse_index_list, main, render, run_cli


class CliTest(unittest.TestCase):
    def test_compare_sl2_iwahori(self):
        status, payload = run_cli(["compare", "--group", "builtin:SL2", "--facet", "[]"])
        self.assertEqual(status, 0)
        self.assertTrue(payload["ok"])
        self.assertEqual(payload["data"]["reports"][0]["verdict"], "isomorphic")

    def test_levi_classes(self):
        status, payload = run_cli(["levi-classes", "--group", "builtin:Sp4"])
        self.assertEqual(status, 0)
        self.assertEqual(payload["data"]["count"], 4)

    def test_hecke_mult(self):
        status, payload = run_cli(["hecke", "mult", "N(1)", "th(1)", "--group", "builtin:SL2"])
        self.assertEqual(status, 0)
        self.assertIn("th(-1)*N(1)", payload["data"]["product"])

    def test_center_check_exit_code(self):
        status, payload = run_cli(["hecke", "center-check", "th(1)", "--group", "builtin:SL2"])
        self.assertEqual(status, 1)
        self.assertFalse(payload["data"]["central"])
        status, _ = run_cli(["hecke", "center-check", "th(1) + th(-1)", "--group", "builtin:SL2"])
        self.assertEqual(status, 0)

    def test_adjoint_check(self):
        status, payload = run_cli(["adjoint-check", "--group", "builtin:SL3"])
        self.assertEqual(status, 0)
        self.assertEqual(payload["data"]["index"], 3)

    def test_bad_group_file(self):
        with tempfile.TemporaryDirectory() as td:
            path = Path(td) / "broken.json"
            path.write_text("{", encoding="utf-8")
            status, payload = run_cli(["validate", "--group", str(path)])
        self.assertEqual(status, 1)
        self.assertFalse(payload["ok"])
        self.assertEqual(payload["error"]["type"], "SpecFormatError")

    def test_usage_error_exits_2(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                run_cli(["no-such-command"])
        self.assertEqual(ctx.exception.code, 2)

    def test_wrong_element_count_exits_2(self):
        for argv in (
            ["hecke", "mult", "N(1)", "--group", "builtin:SL2"],
            ["hecke", "center-check", "th(1)", "th(-1)", "--group", "builtin:SL2"],
        ):
            with redirect_stderr(io.StringIO()) as err:
                with self.assertRaises(SystemExit) as ctx:
                    run_cli(argv)
            self.assertEqual(ctx.exception.code, 2, argv)
            self.assertIn("takes exactly", err.getvalue())

    def test_unknown_builtin_exits_2(self):
        with redirect_stderr(io.StringIO()) as err:
            with self.assertRaises(SystemExit) as ctx:
                run_cli(["validate", "--group", "builtin:SL9"])
        self.assertEqual(ctx.exception.code, 2)
        self.assertIn("unknown builtin group", err.getvalue())

    def test_main_prints_json(self):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = main(["catalog"])
        self.assertEqual(code, 0)
        out = json.loads(buf.getvalue())
        self.assertIn("SL2", [g["name"] for g in out["data"]["groups"]])

    def test_text_rendering(self):
        text = render({"ok": True, "data": {"count": 2, "items": [{"a": 1}]}}, "text")
        self.assertEqual(text.splitlines(), ["data.count: 2", "data.items[0].a: 1", "ok: true"])

    def test_index_list(self):
        self.assertEqual(_parse_index_list("[2,0]"), (0, 2))
        self.assertEqual(_parse_index_list("1 3"), (1, 3))
        self.assertEqual(_parse_index_list("[]"), ())


if __name__ == "__main__":
    unittest.main()
