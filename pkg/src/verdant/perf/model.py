"""Analytical area and latency model of an NVDLA-style MAC array.

The array maps output channels (K) across its width and input channels (C)
across its height.  Each layer is tiled over (K, C, H, W); kernels are never
split.  Per tile the global buffer holds input, weight and output slices
double-buffered, and each PE holds its weight slice of the tile in its
register file.  DRAM transfers overlap compute except for the first tile's
load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from verdant.errors import ConfigError, InfeasibleMappingError

# tile-loop orders, outermost first; P is the flattened spatial (H, W) tile loop
LOOP_ORDERS = ("KCP", "KPC", "CKP", "CPK", "PKC", "PCK")
_OPERAND_DIMS = {"weights": "KC", "inputs": "CP", "outputs": "KP"}


@dataclass(frozen=True)
class LayerShape:
    kind: str  # "conv" or "fc"
    C: int
    K: int
    H: int = 1
    W: int = 1
    R: int = 1
    S: int = 1
    stride: int = 1
    bytes_per_element: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("conv", "fc"):
            raise ValueError(f"layer kind must be conv or fc, got {self.kind!r}")
        for dim in ("C", "K", "H", "W", "R", "S", "stride", "bytes_per_element"):
            if getattr(self, dim) < 1:
                raise ValueError(f"layer {self.name or '?'}: {dim} must be >= 1")
        if self.kind == "fc" and (self.H, self.W, self.R, self.S) != (1, 1, 1, 1):
            raise ValueError("fc layers are 1x1 convolutions: H=W=R=S=1")

    @classmethod
    def fc(cls, C: int, K: int, name: str = "", bytes_per_element: int = 1) -> "LayerShape":
        return cls("fc", C, K, name=name, bytes_per_element=bytes_per_element)


@dataclass(frozen=True)
class AcceleratorConfig:
    pe_width: int
    pe_height: int
    regfile_bytes_per_pe: int
    global_buffer_bytes: int
    clock_hz: float = 1e9
    dram_bw_bytes_per_cycle: float = 64.0
    multiplier_variant: str = ""

    def __post_init__(self):
        if self.pe_width < 1 or self.pe_height < 1:
            raise ValueError("PE array dimensions must be >= 1")
        if self.regfile_bytes_per_pe < 0 or self.global_buffer_bytes < 0:
            raise ValueError("buffer sizes must be >= 0")
        if self.clock_hz <= 0 or self.dram_bw_bytes_per_cycle <= 0:
            raise ValueError("clock and DRAM bandwidth must be > 0")

    @property
    def pes(self) -> int:
        return self.pe_width * self.pe_height


@dataclass(frozen=True)
class Mapping:
    t_K: int
    t_C: int
    t_H: int
    t_W: int
    order: str
    working_set_bytes: int   # one buffer's worth; the global buffer holds two
    regfile_bytes: int       # per-PE weight slice
    traffic_bytes: int
    compute_cycles: int
    stall_cycles: int

    @property
    def tiles(self) -> tuple[int, int, int, int]:
        return (self.t_K, self.t_C, self.t_H, self.t_W)


@dataclass(frozen=True)
class PerfResult:
    cycles_per_inference: int
    latency_s: float
    fps: float
    utilization: float
    layer_cycles: tuple[int, ...] = ()


@dataclass(frozen=True)
class AreaLib:
    ge_to_mm2: float
    sram_mm2_per_byte: float
    adder_ge: float
    fixed_overhead_mm2: float
    clock_hz: float = 1e9

    @classmethod
    def from_dict(cls, record: dict, where: str = "area") -> "AreaLib":
        missing = [f for f in ("ge_to_mm2", "sram_mm2_per_byte", "adder_ge", "fixed_overhead_mm2")
                   if f not in record]
        if missing:
            raise ConfigError(f"{where}: missing area constants {', '.join(missing)}")
        return cls(**{k: float(v) for k, v in record.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class AcceleratorPreset:
    """Buffer sizing rule and search ladders for the PE-count sweep."""

    pe_sizes: tuple[int, ...] = (64, 128, 256, 512, 1024, 2048)
    regfile_bytes_per_pe: int = 64
    gbuf_bytes_per_pe: int = 256
    dram_bw_bytes_per_cycle: float = 64.0
    aspect_shifts: tuple[int, ...] = (-2, -1, 0, 1, 2)
    regfile_scales: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    gbuf_scales: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0)

    def config(
        self,
        pes: int,
        clock_hz: float,
        aspect_shift: int = 0,
        regfile_scale: float = 1.0,
        gbuf_scale: float = 1.0,
        variant_id: str = "",
    ) -> AcceleratorConfig:
        width, height = array_shape(pes, aspect_shift)
        return AcceleratorConfig(
            pe_width=width,
            pe_height=height,
            regfile_bytes_per_pe=int(round(self.regfile_bytes_per_pe * regfile_scale)),
            global_buffer_bytes=int(round(self.gbuf_bytes_per_pe * pes * gbuf_scale)),
            clock_hz=clock_hz,
            dram_bw_bytes_per_cycle=self.dram_bw_bytes_per_cycle,
            multiplier_variant=variant_id,
        )


def array_shape(pes: int, aspect_shift: int = 0) -> tuple[int, int]:
    """(width, height) for a power-of-two PE count.

    Shift 0 is the near-square split with height >= width; each unit of
    ``aspect_shift`` doubles the width and halves the height.
    """
    if pes < 1 or pes & (pes - 1):
        raise ValueError(f"PE count must be a power of two, got {pes}")
    log2 = pes.bit_length() - 1
    h_log = (log2 + 1) // 2 - aspect_shift
    if not 0 <= h_log <= log2:
        raise ValueError(f"aspect shift {aspect_shift} infeasible for {pes} PEs")
    height = 1 << h_log
    return pes // height, height


def layer_macs(layer: LayerShape) -> int:
    return layer.K * layer.C * layer.H * layer.W * layer.R * layer.S


def tile_candidates(bound: int) -> list[int]:
    """Tile sizes ``ceil(bound / 2^j)`` for j = 0, 1, ... down to 1."""
    return sorted({-(-bound // (1 << j)) for j in range(bound.bit_length() + 1)})


def _ceil_div(a, b):
    return -(-a // b)


def _spatial_chunks(bound, tile, par):
    """Sum over tiles of ceil(tile_size / par), last tile partial."""
    full = bound // tile
    rem = bound % tile
    return full * _ceil_div(tile, par) + _ceil_div(rem, par)


def map_layer(layer: LayerShape, config: AcceleratorConfig) -> tuple[Mapping, int]:
    """Cheapest tiling and tile-loop order for one layer on ``config``.

    Enumerates every candidate tiling and loop order, discards those that
    overflow the global buffer or register file, and returns the one with
    the fewest cycles (ties: smallest (t_K, t_C, t_H, t_W), then order).
    """
    mapping = _map_layer(
        layer,
        config.pe_width,
        config.pe_height,
        config.regfile_bytes_per_pe,
        config.global_buffer_bytes,
        float(config.dram_bw_bytes_per_cycle),
    )
    return mapping, mapping.compute_cycles + mapping.stall_cycles


@lru_cache(maxsize=1 << 16)
def _map_layer(layer: LayerShape, pw: int, ph: int, rf: int, gbuf: int, bw: float) -> Mapping:
    L = layer
    bpe = L.bytes_per_element
    tK, tC, tH, tW = (
        a.ravel()
        for a in np.meshgrid(
            np.array(tile_candidates(L.K), dtype=np.int64),
            np.array(tile_candidates(L.C), dtype=np.int64),
            np.array(tile_candidates(L.H), dtype=np.int64),
            np.array(tile_candidates(L.W), dtype=np.int64),
            indexing="ij",
        )
    )
    n = {"K": _ceil_div(L.K, tK), "C": _ceil_div(L.C, tC), "P": _ceil_div(L.H, tH) * _ceil_div(L.W, tW)}
    compute = _spatial_chunks(L.K, tK, pw) * _spatial_chunks(L.C, tC, ph) * (L.H * L.W * L.R * L.S)

    size = {
        "inputs": tC * ((tH - 1) * L.stride + L.R) * ((tW - 1) * L.stride + L.S) * bpe,
        "weights": tK * tC * (L.R * L.S * bpe),
        "outputs": tK * tH * tW * bpe,
    }
    working_set = size["inputs"] + size["weights"] + size["outputs"]
    per_pe = _ceil_div(tK, pw) * _ceil_div(tC, ph) * (L.R * L.S * bpe)
    feasible = (2 * working_set <= gbuf) & (per_pe <= rf)
    if not feasible.any():
        raise InfeasibleMappingError(
            f"layer {L.name or L}: no tiling fits regfile {rf} B/PE and global buffer {gbuf} B"
        )

    traffic_by_order = []
    for order in LOOP_ORDERS:
        traffic = np.zeros_like(compute)
        for op, dims in _OPERAND_DIMS.items():
            # a loop refetches the operand only if some relevant loop at or
            # inside it has more than one trip; otherwise the tile stays put
            fetches = np.ones_like(compute)
            for i, d in enumerate(order):
                changes = np.zeros(compute.shape, dtype=bool)
                for r in dims:
                    if order.index(r) >= i:
                        changes = changes | (n[r] > 1)
                fetches = fetches * np.where(changes, n[d], 1)
            if op == "outputs":
                # every eviction writes; re-entries read the partial sums back
                traffic = traffic + size[op] * (2 * fetches - n["K"] * n["P"])
            else:
                traffic = traffic + size[op] * fetches
        traffic_by_order.append(traffic)
    traffic = np.stack(traffic_by_order, axis=1)  # (grid, orders)

    first_load = (size["inputs"] + size["weights"])[:, None]
    if math.isinf(bw):
        stall = np.zeros_like(traffic)
    else:
        prologue = np.ceil(first_load / bw).astype(np.int64)
        rest = np.ceil((traffic - first_load) / bw).astype(np.int64)
        stall = prologue + np.maximum(0, rest - compute[:, None])
    cycles = compute[:, None] + stall
    cycles = np.where(feasible[:, None], cycles, np.iinfo(np.int64).max)
    best = int(np.argmin(cycles))  # row-major: first grid point, then first order
    g, o = divmod(best, len(LOOP_ORDERS))
    return Mapping(
        t_K=int(tK[g]),
        t_C=int(tC[g]),
        t_H=int(tH[g]),
        t_W=int(tW[g]),
        order=LOOP_ORDERS[o],
        working_set_bytes=int(working_set[g]),
        regfile_bytes=int(per_pe[g]),
        traffic_bytes=int(traffic[g, o]),
        compute_cycles=int(compute[g]),
        stall_cycles=int(stall[g, o]),
    )


def workload_latency(workload: Sequence[LayerShape], config: AcceleratorConfig) -> PerfResult:
    layer_cycles = tuple(map_layer(layer, config)[1] for layer in workload)
    cycles = sum(layer_cycles)
    macs = sum(layer_macs(layer) for layer in workload)
    latency = cycles / config.clock_hz
    return PerfResult(
        cycles_per_inference=cycles,
        latency_s=latency,
        fps=config.clock_hz / cycles,
        utilization=macs / (cycles * config.pes),
        layer_cycles=layer_cycles,
    )


def accelerator_area(config: AcceleratorConfig, variant, area_lib: AreaLib) -> float:
    """Die area in mm^2: PE array (multiplier, accumulator, register file),
    global buffer and a fixed overhead.

    ``variant`` is anything with an ``area`` in gate-equivalents.
    """
    if area_lib is None:
        raise ConfigError("no area constants for this technology node")
    ge = area_lib.ge_to_mm2
    sram = area_lib.sram_mm2_per_byte
    per_pe = variant.area * ge + area_lib.adder_ge * ge + config.regfile_bytes_per_pe * sram
    return config.pes * per_pe + config.global_buffer_bytes * sram + area_lib.fixed_overhead_mm2


def with_variant(config: AcceleratorConfig, variant_id: str) -> AcceleratorConfig:
    return replace(config, multiplier_variant=variant_id)
