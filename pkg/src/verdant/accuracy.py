"""Accuracy-drop estimates for approximate multiplier variants.

Two sources are supported: a lookup table filled from external
measurements, or a linear proxy on MRED.  The proxy coefficients shipped in
the default config are placeholders, not a calibrated fit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml


@dataclass(frozen=True)
class AccuracyModel:
    mode: str = "proxy"
    c0: float = 0.0
    c1: float = 50.0
    table: dict = field(default_factory=dict)  # (variant_id, network) -> drop_pct

    def __post_init__(self):
        if self.mode not in ("proxy", "table"):
            raise ValueError(f"mode must be 'proxy' or 'table', got {self.mode!r}")
        if self.c1 < 0:
            raise ValueError("proxy slope c1 must be >= 0")
        for key, drop in self.table.items():
            if drop < 0:
                raise ValueError(f"negative accuracy drop for {key}: {drop}")

    @classmethod
    def proxy(cls, c0: float = 0.0, c1: float = 50.0) -> "AccuracyModel":
        return cls(mode="proxy", c0=c0, c1=c1)

    @classmethod
    def from_records(cls, records) -> "AccuracyModel":
        table = {}
        for r in records:
            table[(str(r["variant_id"]), str(r["network"]).lower())] = float(r["drop_pct"])
        return cls(mode="table", table=table)

    @classmethod
    def load_table(cls, path) -> "AccuracyModel":
        """Read (variant_id, network, drop_pct) records from CSV, JSON or YAML."""
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".csv":
            records = list(csv.DictReader(text.splitlines()))
        elif path.suffix.lower() == ".json":
            records = json.loads(text)
        else:
            records = yaml.safe_load(text)
        return cls.from_records(records)


def accuracy_drop(variant, network: str | None, model: AccuracyModel) -> float:
    """Estimated top-1 accuracy drop in percent; exactly 0 for an exact variant.

    Table mode never falls back to the proxy: a missing entry raises KeyError.
    """
    if variant.metrics.is_exact:
        return 0.0
    if model.mode == "table":
        key = (variant.id, (network or "").lower())
        if key not in model.table:
            raise KeyError(f"no accuracy entry for variant {variant.id!r} on network {network!r}")
        return model.table[key]
    return max(0.0, model.c0 + model.c1 * variant.metrics.mred)
