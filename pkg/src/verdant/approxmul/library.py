"""Variant library files: the characterized Pareto front as JSON records."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from verdant.approxmul.metrics import ErrorMetrics
from verdant.approxmul.netlist import DEFAULT_GATE_AREA, apply_approximation, build_exact_multiplier
from verdant.approxmul.search import MultiplierVariant
from verdant.errors import ConfigError

FORMAT = "verdant-variant-library/1"


def variant_record(v: MultiplierVariant) -> dict:
    m = v.metrics
    return {
        "id": v.id,
        "area": v.area,
        "MED": m.med,
        "MRED": m.mred,
        "ER": m.er,
        "WCE": m.wce,
        "provenance": v.provenance,
    }


def library_body(variants: Sequence[MultiplierVariant], bitwidth: int, gate_area=None) -> dict:
    return {
        "format": FORMAT,
        "bitwidth": bitwidth,
        "gate_area": dict(gate_area or DEFAULT_GATE_AREA),
        "variants": [variant_record(v) for v in variants],
    }


def save_library(path, variants, bitwidth: int, manifest: dict | None = None, gate_area=None) -> None:
    doc = {"manifest": manifest or {}}
    doc.update(library_body(variants, bitwidth, gate_area))
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_library(path) -> list[MultiplierVariant]:
    """Rebuild every variant's netlist from its provenance and check its area."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"variant library not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if doc.get("format") != FORMAT:
        raise ConfigError(f"{path}: unsupported library format {doc.get('format')!r}")
    base = build_exact_multiplier(int(doc["bitwidth"]))
    gate_area = doc.get("gate_area")
    variants = []
    for rec in doc["variants"]:
        try:
            prov = rec["provenance"]
            cuts = {int(g): rep for g, rep in prov["cuts"]}
            net = apply_approximation(base, cuts, int(prov["k"]))
            metrics = ErrorMetrics(float(rec["MED"]), float(rec["MRED"]), float(rec["ER"]), int(rec["WCE"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: variant {rec.get('id', '?')}: bad record ({exc})") from None
        area = net.area(gate_area)
        if abs(area - float(rec["area"])) > 1e-9:
            raise ConfigError(
                f"{path}: variant {rec['id']}: recorded area {rec['area']} != rebuilt area {area}"
            )
        variants.append(
            MultiplierVariant(rec["id"], net, area, metrics, tuple(sorted(cuts.items())), int(prov["k"]))
        )
    return variants


def find_variant(variants: Sequence[MultiplierVariant], variant_id: str) -> MultiplierVariant:
    for v in variants:
        if v.id == variant_id:
            return v
    raise KeyError(f"variant {variant_id!r} not in library")
