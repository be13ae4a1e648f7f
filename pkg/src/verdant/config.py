"""Loading of the YAML configuration (technology presets, ladders, defaults).

The packaged ``data/verdant.yaml`` is the default.  ``VERDANT_CONFIG`` may
point to a directory containing a replacement ``verdant.yaml``; an explicit
path passed to :func:`load_config` wins over both.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from verdant.accuracy import AccuracyModel
from verdant.carbon import TechNodeParams
from verdant.errors import ConfigError
from verdant.perf.model import AcceleratorPreset, AreaLib

CONFIG_ENV = "VERDANT_CONFIG"
CONFIG_FILENAME = "verdant.yaml"


@dataclass(frozen=True)
class NodePreset:
    tech: TechNodeParams
    area: AreaLib


@dataclass
class Config:
    nodes: dict[int, NodePreset]
    accelerator: AcceleratorPreset
    gate_area: dict[str, float]
    accuracy: AccuracyModel
    multiplier_search: dict = field(default_factory=dict)
    ga: dict = field(default_factory=dict)
    constraints: dict = field(default_factory=dict)
    source: str = ""

    def node(self, node_nm: int) -> NodePreset:
        try:
            return self.nodes[int(node_nm)]
        except KeyError:
            raise ConfigError(
                f"no preset for {node_nm} nm in {self.source}; available: {sorted(self.nodes)}"
            ) from None


def config_path(explicit=None) -> Path | None:
    if explicit:
        return Path(explicit)
    env = os.environ.get(CONFIG_ENV)
    if env:
        p = Path(env)
        return p / CONFIG_FILENAME if p.is_dir() else p
    return None


def _read(path: Path | None) -> tuple[dict, str]:
    if path is None:
        text = resources.files("verdant").joinpath("data", CONFIG_FILENAME).read_text("utf-8")
        return yaml.safe_load(text), "<builtin>"
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return yaml.safe_load(path.read_text(encoding="utf-8")) or {}, str(path)


def _parse_nodes(raw: dict, source: str) -> dict[int, NodePreset]:
    nodes = {}
    for key, rec in (raw or {}).items():
        where = f"{source}: nodes.{key}"
        if not isinstance(rec, dict):
            raise ConfigError(f"{where}: expected a mapping")
        rec = dict(rec)
        rec.setdefault("node_nm", int(key))
        try:
            tech = TechNodeParams.from_dict(rec)
        except TypeError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if "area" not in rec:
            raise ConfigError(f"{where}: missing 'area' constants")
        nodes[int(key)] = NodePreset(tech, AreaLib.from_dict(rec["area"], f"{where}.area"))
    return nodes


def _parse_accelerator(raw: dict) -> AcceleratorPreset:
    raw = dict(raw or {})
    for key in ("pe_sizes", "aspect_shifts", "regfile_scales", "gbuf_scales"):
        if key in raw:
            raw[key] = tuple(raw[key])
    unknown = set(raw) - set(AcceleratorPreset.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"accelerator: unknown fields {sorted(unknown)}")
    return AcceleratorPreset(**raw)


def _parse_accuracy(raw: dict) -> AccuracyModel:
    raw = raw or {}
    mode = raw.get("mode", "proxy")
    if mode == "proxy":
        return AccuracyModel.proxy(float(raw.get("c0", 0.0)), float(raw.get("c1", 50.0)))
    if mode == "table":
        if "table" not in raw:
            raise ConfigError("accuracy: table mode needs a 'table' file path")
        return AccuracyModel.load_table(raw["table"])
    raise ConfigError(f"accuracy: unknown mode {mode!r}")


def load_config(path=None) -> Config:
    path = config_path(path)
    data, source = _read(path)
    return Config(
        nodes=_parse_nodes(data.get("nodes"), source),
        accelerator=_parse_accelerator(data.get("accelerator")),
        gate_area={k: float(v) for k, v in (data.get("gate_area") or {}).items()},
        accuracy=_parse_accuracy(data.get("accuracy")),
        multiplier_search=dict(data.get("multiplier_search") or {}),
        ga=dict(data.get("ga") or {}),
        constraints=dict(data.get("constraints") or {}),
        source=source,
    )
