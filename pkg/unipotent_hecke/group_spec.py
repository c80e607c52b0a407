#!/usr/bin/env python3
"""Group-spec and parameter-table files.

Both formats are JSON. Lines whose first non-blank character is ``#`` are
comments and are dropped before parsing.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .affine_weyl import IwahoriWeylDatum, analyze_facet, facet_root_datum
from .components import ComponentEntry
from .config import HeckeConfig
from .errors import ParameterError, SpecFormatError
from .galois_relative import AnisotropicMarking, GaloisDatum, galois_datum
from .integer_modules import IntegerMatrix
from .root_datum import BasedRootDatum, validate_and_classify

log = logging.getLogger(__name__)

TableKey = tuple[str, tuple[int, ...], str]


def strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(strip_comments(text))
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{what} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc


def _int_list(value: Any, what: str) -> tuple[int, ...]:
    if not isinstance(value, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in value):
        raise SpecFormatError(f"{what} must be a list of integers", witness=value)
    return tuple(value)


def _int_rows(value: Any, what: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list):
        raise SpecFormatError(f"{what} must be a list of integer lists", witness=value)
    return tuple(_int_list(v, what) for v in value)


@dataclass(frozen=True)
class GroupSpec:
    name: str
    rank: int
    roots: tuple[tuple[int, ...], ...]
    coroots: tuple[tuple[int, ...], ...]
    simple_indices: tuple[int, ...]
    frobenius: IntegerMatrix
    delta0: tuple[int, ...] = ()
    components: tuple[ComponentEntry, ...] = field(default=(ComponentEntry(),))
    description: str = field(default="", compare=False)

    def root_datum(self) -> BasedRootDatum:
        return BasedRootDatum(self.rank, self.roots, self.coroots, self.simple_indices, self.name)

    def galois(self, config: HeckeConfig | None = None) -> GaloisDatum:
        return galois_datum(self.root_datum(), [self.frobenius], config)

    def marking(self) -> AnisotropicMarking:
        return AnisotropicMarking(tuple(self.delta0))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "roots": [list(r) for r in self.roots],
            "coroots": [list(c) for c in self.coroots],
            "simple_indices": list(self.simple_indices),
            "frobenius": self.frobenius.to_list(),
            "delta0": list(self.delta0),
            "components": [_entry_dict(e) for e in self.components],
            "description": self.description,
        }


def _entry_dict(e: ComponentEntry) -> dict:
    out = e.to_dict()
    if e.galois is not None:
        out["galois"] = dict(e.galois)
    return out


def _component_entry(raw: Any) -> ComponentEntry:
    if not isinstance(raw, dict):
        raise SpecFormatError("component entries must be objects", witness=raw)
    exps = raw.get("exponents")
    if exps is not None:
        if not isinstance(exps, dict):
            raise SpecFormatError("exponents must map node labels to integers", witness=exps)
        try:
            exps = tuple(sorted((int(k), int(v)) for k, v in exps.items()))
        except (TypeError, ValueError) as exc:
            raise SpecFormatError("exponents must map node labels to integers", witness=raw["exponents"]) from exc
    levi = raw.get("levi")
    galois = raw.get("galois")
    if galois is not None and not isinstance(galois, dict):
        raise SpecFormatError("galois table data must be an object", witness=galois)
    return ComponentEntry(
        J=tuple(sorted(_int_list(raw.get("J", []), "J"))),
        cuspidal_id=str(raw.get("cuspidal_id", "iwahori")),
        exponents=exps,
        levi=tuple(sorted(_int_list(levi, "levi"))) if levi is not None else None,
        galois=galois,
    )


def group_spec_from_dict(data: Mapping[str, Any]) -> GroupSpec:
    if not isinstance(data, Mapping):
        raise SpecFormatError("group spec must be a JSON object")
    for key in ("name", "rank", "roots", "coroots", "simple_indices"):
        if key not in data:
            raise SpecFormatError(f"group spec is missing '{key}'")
    rank = data["rank"]
    if isinstance(rank, bool) or not isinstance(rank, int) or rank < 0:
        raise SpecFormatError("rank must be a nonnegative integer", witness=rank)
    roots = _int_rows(data["roots"], "roots")
    coroots = _int_rows(data["coroots"], "coroots")
    if len(roots) != len(coroots) or any(len(v) != rank for v in roots + coroots):
        raise SpecFormatError("roots and coroots must be paired vectors of length rank", witness={"rank": rank})
    frob = data.get("frobenius")
    if frob is None:
        F = IntegerMatrix.identity(rank)
    else:
        rows = _int_rows(frob, "frobenius")
        if len(rows) != rank or any(len(r) != rank for r in rows):
            raise SpecFormatError("frobenius must be a rank x rank integer matrix", witness=frob)
        F = IntegerMatrix.from_rows(rows, rank)
    comps = data.get("components")
    entries = tuple(_component_entry(c) for c in comps) if comps is not None else (ComponentEntry(),)
    return GroupSpec(
        name=str(data["name"]),
        rank=rank,
        roots=roots,
        coroots=coroots,
        simple_indices=_int_list(data["simple_indices"], "simple_indices"),
        frobenius=F,
        delta0=tuple(sorted(_int_list(data.get("delta0", []), "delta0"))),
        components=entries,
        description=str(data.get("description", "")),
    )


def parse_group_spec(text: str) -> GroupSpec:
    return group_spec_from_dict(_load_json(text, "group spec"))


def read_group_spec(path: str | Path) -> GroupSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFormatError(f"cannot read group spec {p}: {exc.strerror}") from exc
    spec = parse_group_spec(text)
    log.debug("read group spec %s from %s", spec.name, p)
    return spec


# -- parameter tables -------------------------------------------------------------


def affine_type_label(D: IwahoriWeylDatum, config: HeckeConfig | None = None) -> str:
    """Type of the Iwahori R_f with a tilde per component, e.g. ``A1~`` or ``A1~ x A1~``; ``T`` when empty."""
    f = facet_root_datum(D, analyze_facet(D, (), config), config)
    types = validate_and_classify(f.Rf).types
    return " x ".join(f"{t}~" for t in types) or "T"


def parse_parameter_table(text: str) -> dict[TableKey, dict[int, int]]:
    """Entries keyed by (affine type, sorted J, cuspidal id); order-insensitive."""
    data = _load_json(text, "parameter table")
    raw = data.get("entries") if isinstance(data, dict) else data
    if not isinstance(raw, list):
        raise SpecFormatError("parameter table must be a list of entries or an object with 'entries'")
    table: dict[TableKey, dict[int, int]] = {}
    for item in raw:
        if not isinstance(item, dict) or not {"type", "exponents"} <= set(item):
            raise SpecFormatError("parameter entries need 'type' and 'exponents'", witness=item)
        key = (str(item["type"]), tuple(sorted(_int_list(item.get("J", []), "J"))), str(item.get("cuspidal_id", "iwahori")))
        try:
            exps = {int(k): int(v) for k, v in item["exponents"].items()}
        except (AttributeError, TypeError, ValueError) as exc:
            raise SpecFormatError("exponents must map node labels to integers", witness=item) from exc
        if any(v < 0 for v in exps.values()):
            raise SpecFormatError("exponents must be nonnegative", witness=item)
        if key in table and table[key] != exps:
            raise SpecFormatError("conflicting duplicate parameter entry", witness={"type": key[0], "J": list(key[1]), "cuspidal_id": key[2]})
        table[key] = exps
    return table


def read_parameter_table(path: str | Path) -> dict[TableKey, dict[int, int]]:
    p = Path(path)
    try:
        return parse_parameter_table(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecFormatError(f"cannot read parameter table {p}: {exc.strerror}") from exc


def lookup_exponents(table: Mapping[TableKey, Mapping[int, int]], affine_type: str, J, cuspidal_id: str) -> dict[int, int]:
    key = (affine_type, tuple(sorted(int(j) for j in J)), cuspidal_id)
    if key not in table:
        raise ParameterError("no parameter table entry", witness={"type": affine_type, "J": list(key[1]), "cuspidal_id": cuspidal_id})
    return dict(table[key])
