"""Embodied carbon of a monolithic logic die.

The footprint of one die is the carbon per unit area of the die (process
energy, gases and materials, inflated by yield loss) times its area, plus
the raw-silicon carbon of that die's share of the wafer area that never
became a die.  Yield follows the negative-binomial clustered-defect model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class TechNodeParams:
    node_nm: int
    ci_fab: float          # gCO2e / kWh
    epa: float             # kWh / mm^2
    c_gas: float           # gCO2e / mm^2
    c_material: float      # gCO2e / mm^2
    cfpa_si: float         # gCO2e / mm^2
    defect_density: float  # defects / mm^2
    yield_alpha: float
    wafer_diameter: float  # mm
    edge_exclusion: float = 0.0  # mm

    def __post_init__(self):
        for name in ("node_nm", "ci_fab", "epa", "yield_alpha", "wafer_diameter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("c_gas", "c_material", "cfpa_si", "defect_density", "edge_exclusion"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if 2 * self.edge_exclusion >= self.wafer_diameter:
            raise ValueError("edge_exclusion leaves no usable wafer")
        # raw silicon dearer than processed silicon would make carbon fall with die area
        if self.cfpa_si >= self.process_carbon_per_area:
            raise ValueError("cfpa_si must be below ci_fab*epa + c_gas + c_material")

    @classmethod
    def from_dict(cls, record: dict) -> "TechNodeParams":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in record.items() if k in names})

    @property
    def process_carbon_per_area(self) -> float:
        return self.ci_fab * self.epa + self.c_gas + self.c_material

    @property
    def wafer_area(self) -> float:
        return math.pi * (self.wafer_diameter / 2) ** 2


@dataclass(frozen=True)
class CarbonResult:
    die_area: float        # mm^2
    yield_fraction: float
    cfpa: float            # gCO2e / mm^2
    cfpa_si: float         # gCO2e / mm^2
    wasted_area: float     # mm^2 per die
    dies_per_wafer: int
    embodied: float        # gCO2e


def yield_fraction(die_area: float, params: TechNodeParams) -> float:
    """Negative-binomial die yield ``(1 + A*D0/alpha) ** -alpha``."""
    if die_area < 0:
        raise ValueError(f"die_area must be >= 0, got {die_area}")
    return (1.0 + die_area * params.defect_density / params.yield_alpha) ** (-params.yield_alpha)


def cfpa(die_area: float, params: TechNodeParams) -> float:
    """Carbon footprint per mm^2 of good die at this die size."""
    return params.process_carbon_per_area / yield_fraction(die_area, params)


def dies_per_wafer(die_area: float, wafer_diameter: float, edge_exclusion: float = 0.0) -> int:
    """Gross dies per wafer, ``floor(pi (d/2)^2 / A - pi d / sqrt(2A))`` clamped at 1.

    ``edge_exclusion`` shrinks the usable diameter by twice the margin.
    """
    if die_area <= 0 or wafer_diameter <= 0:
        raise ValueError("die_area and wafer_diameter must be > 0")
    d = wafer_diameter - 2 * edge_exclusion
    if d <= 0:
        raise ValueError("edge_exclusion leaves no usable wafer")
    usable = math.pi * (d / 2) ** 2
    if die_area > usable:
        raise ValueError(
            f"zero dies: die_area {die_area} mm^2 exceeds usable wafer area {usable:.1f} mm^2"
        )
    n = math.floor(usable / die_area - math.pi * d / math.sqrt(2 * die_area))
    return max(1, n)


def embodied_carbon(die_area: float, params: TechNodeParams) -> CarbonResult:
    if die_area <= 0:
        raise ValueError(f"die_area must be > 0, got {die_area}")
    n = dies_per_wafer(die_area, params.wafer_diameter, params.edge_exclusion)
    # per-die share of the wafer silicon that is not sold as die
    wasted = (params.wafer_area - n * die_area) / n
    y = yield_fraction(die_area, params)
    c = cfpa(die_area, params)
    return CarbonResult(
        die_area=die_area,
        yield_fraction=y,
        cfpa=c,
        cfpa_si=params.cfpa_si,
        wasted_area=wasted,
        dies_per_wafer=n,
        embodied=c * die_area + params.cfpa_si * wasted,
    )
