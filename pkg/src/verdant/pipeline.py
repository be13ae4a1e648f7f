"""Glue shared by the CLI and scripted studies: sweeps and run contexts."""

from __future__ import annotations

from typing import Sequence

from verdant.accuracy import AccuracyModel
from verdant.approxmul.search import MultiplierVariant, exact_variant, filter_by_accuracy
from verdant.approxmul.netlist import build_exact_multiplier
from verdant.config import Config
from verdant.optimizer import EvalContext, SearchSpace, baseline_designs
from verdant.perf.model import LayerShape

SWEEP_COLUMNS = (
    "pes",
    "pe_width",
    "pe_height",
    "variant_id",
    "variant_area_ge",
    "area_mm2",
    "embodied_g",
    "fps",
    "latency_s",
    "drop_pct",
    "cdp",
)


def default_exact(bitwidth: int = 8, gate_area=None) -> MultiplierVariant:
    return exact_variant(build_exact_multiplier(bitwidth), id=f"m{bitwidth}_exact", gate_area=gate_area)


def smallest_within(
    variants: Sequence[MultiplierVariant], model: AccuracyModel, drop_max: float, network: str
) -> MultiplierVariant:
    """Lowest-area variant whose estimated drop is within ``drop_max``."""
    ok = filter_by_accuracy(variants, model, drop_max, network)
    return min(ok, key=lambda v: (v.area, v.metrics.mred, v.id))


def make_context(
    config: Config,
    node: int,
    network: str,
    workload: Sequence[LayerShape],
    variants: Sequence[MultiplierVariant],
    fps_min: float = 0.0,
    drop_max: float = float("inf"),
    pe_sizes: Sequence[int] | None = None,
) -> EvalContext:
    """Context whose variant ladder is ``variants`` filtered to ``drop_max``."""
    preset = config.node(node)
    ladder = filter_by_accuracy(variants, config.accuracy, drop_max, network) if variants else []
    if not ladder:
        ladder = [default_exact(gate_area=config.gate_area or None)]
    space = SearchSpace.from_preset(config.accelerator, ladder)
    if pe_sizes is not None:
        space = SearchSpace(tuple(pe_sizes), space.aspect_shifts, space.regfile_scales,
                            space.gbuf_scales, space.variants)
    return EvalContext(
        workload=workload,
        network=network,
        tech=preset.tech,
        area_lib=preset.area,
        preset=config.accelerator,
        accuracy=config.accuracy,
        space=space,
        fps_min=fps_min,
        drop_max=drop_max,
    )


def sweep(
    config: Config,
    node: int,
    network: str,
    workload: Sequence[LayerShape],
    variants: Sequence[MultiplierVariant],
    pe_sizes: Sequence[int],
) -> list[dict]:
    """Fixed-architecture rows (default aspect and buffers) per PE size and variant."""
    rows = []
    for v in variants:
        ctx = _single_variant_context(config, node, network, workload, v, pe_sizes)
        for chrom, r in baseline_designs(ctx):
            rows.append({
                "pes": r.pes,
                "pe_width": r.config.pe_width,
                "pe_height": r.config.pe_height,
                "variant_id": v.id,
                "variant_area_ge": v.area,
                "area_mm2": r.area_mm2,
                "embodied_g": r.embodied,
                "fps": r.fps,
                "latency_s": r.latency_s,
                "drop_pct": r.accuracy_drop,
                "cdp": r.cdp,
            })
    return rows


def _single_variant_context(config, node, network, workload, variant, pe_sizes) -> EvalContext:
    preset = config.node(node)
    acc = config.accelerator
    space = SearchSpace(tuple(pe_sizes), acc.aspect_shifts, acc.regfile_scales, acc.gbuf_scales, (variant,))
    return EvalContext(workload, network, preset.tech, preset.area, acc, config.accuracy, space,
                       fps_min=0.0, drop_max=float("inf"))


def baseline_comparison(ctx: EvalContext, result) -> dict:
    """Best exact fixed-architecture design meeting ``fps_min`` vs ``result``."""
    exact = next((v for v in ctx.space.variants if v.is_exact), None) or default_exact()
    space = ctx.space
    exact_ctx = EvalContext(
        ctx.workload, ctx.network, ctx.tech, ctx.area_lib, ctx.preset, ctx.accuracy,
        SearchSpace(space.pe_sizes, space.aspect_shifts, space.regfile_scales, space.gbuf_scales, (exact,)),
        ctx.fps_min, ctx.drop_max,
    )
    designs = baseline_designs(exact_ctx)
    out = {}
    feasible = [r for _, r in designs if r.feasible]
    if feasible:
        best = min(feasible, key=lambda r: (r.cdp, r.pes))
        out["best_exact"] = _compare(best, result)
    out["largest_exact"] = _compare(max((r for _, r in designs), key=lambda r: r.pes), result)
    return out


def _compare(base, result) -> dict:
    d = base.as_dict()
    d["carbon_reduction_pct"] = 100.0 * (1.0 - result.embodied / base.embodied)
    d["cdp_reduction_pct"] = 100.0 * (1.0 - result.cdp / base.cdp) if base.cdp < float("inf") else None
    return d
