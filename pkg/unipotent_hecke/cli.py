#!/usr/bin/env python3
"""Command-line entry point.

Every command prints one JSON object ``{"ok": ..., "data": ...}`` (or the same
fields as ``key: value`` lines with ``--format text``) on stdout. Exit codes:
0 success / isomorphic, 1 mismatch or failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import Any, Sequence

from .affine_weyl import analyze_facet, build_iwahori_weyl, check_af_omega_facet, check_af_omega_factorization, check_center_torsion, facet_root_datum
from .catalog import BUILTIN_NAMES, BUILTIN_PREFIX, list_builtins, load_group
from .compare import check_adjoint_invariance, compare_catalog, compare_group, match_group
from .components import check_kottwitz, weakly_unramified_group
from .config import HeckeConfig
from .errors import HeckeToolError
from .group_spec import GroupSpec, affine_type_label, lookup_exponents, read_parameter_table
from .hecke import Presentation, build_from_facet, central_test, format_element, im_multiply, multiply, parse_element, to_bernstein
from .levi_dual import classify_dual_levis, classify_levis
from .root_datum import dual, validate_and_classify

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def _parse_index_list(raw: str) -> tuple[int, ...]:
    text = raw.strip().strip("[]")
    if not text:
        return ()
    try:
        return tuple(sorted(int(x) for x in text.replace(",", " ").split()))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of integers such as '[0,2]', got {raw!r}") from None


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="builtin:SL2", help="group spec file or builtin:NAME")
    common.add_argument("--format", choices=("text", "json"), default="json")
    common.add_argument("--max-elements", type=int)
    common.add_argument("--radius", type=int)
    common.add_argument("--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="unipotent-hecke", description="Unipotent affine Hecke algebra toolkit")
    sub = parser.add_subparsers(dest="cmd", required=True)

    for name in ("validate", "dual", "levi-classes", "dual-levis", "iwahori-weyl", "xwr", "components", "catalog"):
        sub.add_parser(name, parents=[common])

    p_facet = sub.add_parser("facet", parents=[common])
    p_facet.add_argument("--J", type=_parse_index_list, default=())

    p_hecke = sub.add_parser("hecke", parents=[common])
    p_hecke.add_argument("op", choices=("mult", "center-check"))
    p_hecke.add_argument("elements", nargs="+")
    p_hecke.add_argument("--J", type=_parse_index_list, default=())
    p_hecke.add_argument("--presentation", choices=[p.value for p in Presentation], default=Presentation.BERNSTEIN.value)

    p_cmp = sub.add_parser("compare", parents=[common])
    p_cmp.add_argument("--facet", type=_parse_index_list)
    p_cmp.add_argument("--cuspidal", default=None)
    p_cmp.add_argument("--table", help="parameter table overriding catalog exponents")
    p_cmp.add_argument("--all", action="store_true", help="sweep the builtin catalog")

    p_adj = sub.add_parser("adjoint-check", parents=[common])
    p_adj.add_argument("--J", type=_parse_index_list, default=())
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """argparse plus the usage checks it cannot express; all of them exit with 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group.startswith(BUILTIN_PREFIX) and args.group[len(BUILTIN_PREFIX):] not in BUILTIN_NAMES:
        parser.error(f"unknown builtin group {args.group!r}; choose from {', '.join(BUILTIN_NAMES)}")
    if args.cmd == "hecke":
        expected = 2 if args.op == "mult" else 1
        if len(args.elements) != expected:
            parser.error(f"hecke {args.op} takes exactly {expected} element(s), got {len(args.elements)}")
    return args


def _config(args: argparse.Namespace) -> HeckeConfig:
    cfg = HeckeConfig.from_env()
    if args.max_elements is not None:
        cfg = replace(cfg, max_elements=args.max_elements)
    if args.radius is not None:
        cfg = replace(cfg, radius=args.radius)
    return cfg


def _flatten(prefix: str, value: Any, out: list[str]) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(value, ensure_ascii=False)}")


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)
    lines: list[str] = []
    _flatten("", payload, lines)
    return "\n".join(lines)


# -- commands ------------------------------------------------------------------


def cmd_validate(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    cls = validate_and_classify(spec.root_datum())
    G = spec.galois(cfg)
    return True, {
        "group": spec.name,
        "types": list(cls.types),
        "cartan_matrix": cls.cartan_matrix.to_list(),
        "weyl_order": cls.weyl_order,
        "galois_order": G.order,
        "delta0": list(spec.delta0),
    }


def cmd_dual(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    D = spec.root_datum()
    Dv = dual(D)
    involutive = dual(Dv) == D
    return involutive, {"dual": Dv.to_dict(), "types": list(validate_and_classify(Dv).types), "involutive": involutive}


def cmd_levi_classes(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    classes = classify_levis(spec.galois(cfg), spec.marking(), cfg)
    return True, {"count": len(classes), "classes": [c.to_dict() for c in classes]}


def cmd_dual_levis(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    classes = classify_dual_levis(spec.galois(cfg), spec.marking(), cfg)
    relevant = [c for c in classes if c.relevant]
    return True, {"count": len(classes), "relevant": len(relevant), "classes": [c.to_dict() for c in classes]}


def cmd_iwahori_weyl(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    D = build_iwahori_weyl(spec.galois(cfg), spec.marking(), cfg)
    factorization = check_af_omega_factorization(D, cfg.translation_radius)
    return True, {"datum": D.to_dict(), "factorization": factorization}


def cmd_facet(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    D = build_iwahori_weyl(spec.galois(cfg), spec.marking(), cfg)
    f = facet_root_datum(D, analyze_facet(D, args.J, cfg), cfg)
    ok = check_center_torsion(f)
    return ok, {"facet": f.to_dict(), "factorization": check_af_omega_facet(D, f, cfg.radius), "center_torsion": ok}


def cmd_hecke(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    D = build_iwahori_weyl(spec.galois(cfg), spec.marking(), cfg)
    f = facet_root_datum(D, analyze_facet(D, args.J, cfg), cfg)
    H = build_from_facet(D, f, None, cfg).datum
    pres = Presentation(args.presentation)
    elements = [parse_element(H, text, pres) for text in args.elements]
    if args.op == "mult":
        product = im_multiply(H, *elements) if pres is Presentation.IWAHORI_MATSUMOTO else multiply(H, *elements)
        return True, {"product": format_element(H, product), "terms": product.to_dict()}
    e = to_bernstein(H, elements[0]) if pres is Presentation.IWAHORI_MATSUMOTO else elements[0]
    central, witness = central_test(H, e)
    return central, {"central": central, "witness": witness}


def cmd_xwr(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    G = spec.galois(cfg)
    data = {"xwr": weakly_unramified_group(G).to_dict()}
    ok = True
    if not spec.delta0 or set(spec.delta0) == set(spec.simple_indices):
        kott = check_kottwitz(G, build_iwahori_weyl(G, spec.marking(), cfg))
        data["kottwitz"] = kott
        split_semisimple = G.order == 1 and not spec.delta0 and len(spec.simple_indices) == spec.rank
        ok = kott["equal"] or not split_semisimple
    return ok, data


def cmd_components(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    _, _, matches = match_group(spec, cfg)
    return True, {"count": len(matches), "matches": [m.to_dict() for m in matches]}


def _with_table(spec: GroupSpec, path: str, cfg: HeckeConfig) -> GroupSpec:
    table = read_parameter_table(path)
    D = build_iwahori_weyl(spec.galois(cfg), spec.marking(), cfg)
    label = affine_type_label(D, cfg)
    entries = tuple(
        replace(e, exponents=tuple(sorted(lookup_exponents(table, label, e.J, e.cuspidal_id).items())))
        for e in spec.components
    )
    return replace(spec, components=entries)


def cmd_compare(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    if args.all:
        results = compare_catalog(config=cfg)
        return all(r["status"] in ("ok", "unsupported") for r in results), {"groups": results}
    if args.table:
        spec = _with_table(spec, args.table, cfg)
    result = compare_group(spec, cfg, args.facet, args.cuspidal)
    return result.ok, result.to_dict()


def cmd_adjoint_check(spec: GroupSpec, args, cfg: HeckeConfig) -> tuple[bool, dict]:
    report = check_adjoint_invariance(spec, args.J, cfg)
    return report.ok, report.to_dict()


COMMANDS = {
    "validate": cmd_validate,
    "dual": cmd_dual,
    "levi-classes": cmd_levi_classes,
    "dual-levis": cmd_dual_levis,
    "iwahori-weyl": cmd_iwahori_weyl,
    "facet": cmd_facet,
    "hecke": cmd_hecke,
    "xwr": cmd_xwr,
    "components": cmd_components,
    "compare": cmd_compare,
    "adjoint-check": cmd_adjoint_check,
}


def execute(args: argparse.Namespace) -> tuple[int, dict]:
    cfg = _config(args)
    logging.basicConfig(level=logging.DEBUG if args.verbose else cfg.log_level, format=LOG_FORMAT, stream=sys.stderr)
    if args.cmd == "catalog":
        return 0, {"ok": True, "data": {"groups": list_builtins()}}
    try:
        spec = load_group(args.group)
        ok, data = COMMANDS[args.cmd](spec, args, cfg)
    except HeckeToolError as exc:
        log.warning("%s failed: %s", args.cmd, exc)
        return 1, {"ok": False, "error": exc.to_dict()}
    except ValueError as exc:
        log.warning("%s failed: %s", args.cmd, exc)
        return 1, {"ok": False, "error": {"type": type(exc).__name__, "code": "invalid argument", "message": str(exc), "witness": None}}
    return (0 if ok else 1), {"ok": ok, "data": data}


def run_cli(argv: Sequence[str] | None = None) -> tuple[int, dict]:
    """Parse, run, and return (exit status, payload). argparse exits with 2 on usage errors."""
    return execute(parse_args(argv))


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    status, payload = execute(args)
    print(render(payload, args.format))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
