"""Constrained CDP minimization over accelerator architectures and multipliers.

A chromosome is five indices into discrete ladders: PE count, array
aspect, register-file scale, global-buffer scale, multiplier variant.
Per-layer tiling is not part of the chromosome; every decoded architecture
gets its best mapping from :func:`verdant.perf.map_layer`.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from verdant.accuracy import AccuracyModel, accuracy_drop
from verdant.approxmul.search import MultiplierVariant
from verdant.carbon import TechNodeParams, embodied_carbon
from verdant.errors import BudgetError, ConfigError, InfeasibleError, InfeasibleMappingError
from verdant.perf.model import (
    AcceleratorConfig,
    AcceleratorPreset,
    AreaLib,
    LayerShape,
    accelerator_area,
    array_shape,
    workload_latency,
)

INF = float("inf")
EXHAUSTIVE_BUDGET = 100_000


class Chromosome(NamedTuple):
    pe_size_idx: int
    aspect_idx: int
    regfile_scale_idx: int
    gbuf_scale_idx: int
    variant_idx: int


@dataclass(frozen=True)
class SearchSpace:
    pe_sizes: tuple[int, ...]
    aspect_shifts: tuple[int, ...]
    regfile_scales: tuple[float, ...]
    gbuf_scales: tuple[float, ...]
    variants: tuple[MultiplierVariant, ...]

    def __post_init__(self):
        for name in ("pe_sizes", "aspect_shifts", "regfile_scales", "gbuf_scales", "variants"):
            if not getattr(self, name):
                raise ConfigError(f"search space ladder {name} is empty")
        for pes in self.pe_sizes:
            for shift in self.aspect_shifts:
                try:
                    array_shape(pes, shift)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None

    @classmethod
    def from_preset(cls, preset: AcceleratorPreset, variants: Sequence[MultiplierVariant]) -> "SearchSpace":
        return cls(
            tuple(preset.pe_sizes),
            tuple(preset.aspect_shifts),
            tuple(preset.regfile_scales),
            tuple(preset.gbuf_scales),
            tuple(variants),
        )

    @property
    def ladder_sizes(self) -> tuple[int, ...]:
        return (
            len(self.pe_sizes),
            len(self.aspect_shifts),
            len(self.regfile_scales),
            len(self.gbuf_scales),
            len(self.variants),
        )

    @property
    def size(self) -> int:
        return math.prod(self.ladder_sizes)

    def restrict(self, **keep) -> "SearchSpace":
        """Sub-space keeping the listed indices of each named ladder."""
        fields_ = {}
        for name in ("pe_sizes", "aspect_shifts", "regfile_scales", "gbuf_scales", "variants"):
            ladder = getattr(self, name)
            fields_[name] = tuple(ladder[i] for i in keep[name]) if name in keep else ladder
        return SearchSpace(**fields_)

    def chromosomes(self):
        for genes in itertools.product(*(range(n) for n in self.ladder_sizes)):
            yield Chromosome(*genes)

    def baselines(self) -> list[Chromosome]:
        """One chromosome per PE size: default aspect and buffers, exact multiplier."""
        aspect = _index_or(self.aspect_shifts, 0, len(self.aspect_shifts) // 2)
        rf = _index_or(self.regfile_scales, 1.0, 0)
        gb = _index_or(self.gbuf_scales, 1.0, 0)
        exact = next((i for i, v in enumerate(self.variants) if v.is_exact), len(self.variants) - 1)
        return [Chromosome(p, aspect, rf, gb, exact) for p in range(len(self.pe_sizes))]


def _index_or(ladder, value, default) -> int:
    return ladder.index(value) if value in ladder else default


@dataclass
class EvalContext:
    workload: Sequence[LayerShape]
    network: str
    tech: TechNodeParams
    area_lib: AreaLib
    preset: AcceleratorPreset
    accuracy: AccuracyModel
    space: SearchSpace
    fps_min: float
    drop_max: float

    def __post_init__(self):
        if not self.workload:
            raise ConfigError("empty workload")
        if self.drop_max < 0:
            raise ConfigError("drop_max must be >= 0")


@dataclass(frozen=True)
class EvalResult:
    embodied: float      # gCO2e
    latency_s: float
    fps: float
    accuracy_drop: float  # percent
    cdp: float           # gCO2e * s
    feasible: bool
    area_mm2: float = 0.0
    pes: int = 0
    config: AcceleratorConfig | None = field(default=None, compare=False)

    def as_dict(self) -> dict:
        return {
            "pes": self.pes,
            "area_mm2": self.area_mm2,
            "embodied_g": self.embodied,
            "latency_s": self.latency_s,
            "fps": self.fps,
            "drop_pct": self.accuracy_drop,
            "cdp": self.cdp,
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class GaParams:
    population: int = 64
    generations: int = 100
    tournament_k: int = 3
    crossover_p: float = 0.9
    mutation_p: float | None = None  # None -> 1 / number of genes
    elitism: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 1 <= self.elitism < self.population:
            raise ValueError("elitism must be in [1, population)")
        if self.generations < 0 or self.tournament_k < 1:
            raise ValueError("generations must be >= 0 and tournament_k >= 1")
        for name in ("crossover_p", "mutation_p"):
            p = getattr(self, name)
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")


@dataclass
class OptimizeResult:
    best: Chromosome
    result: EvalResult
    history: list[float]
    evaluations: int


def cdp(embodied: float, latency_s: float) -> float:
    """Carbon-delay product of one die and one inference."""
    if not embodied > 0 or not latency_s > 0:
        raise ValueError(f"embodied and latency must be > 0, got {embodied}, {latency_s}")
    return embodied * latency_s


def decode(chrom: Chromosome, ctx: EvalContext) -> tuple[AcceleratorConfig, MultiplierVariant]:
    s = ctx.space
    for gene, n in zip(chrom, s.ladder_sizes):
        if not 0 <= gene < n:
            raise ConfigError(f"gene index {gene} outside ladder of size {n}")
    variant = s.variants[chrom.variant_idx]
    config = ctx.preset.config(
        s.pe_sizes[chrom.pe_size_idx],
        ctx.area_lib.clock_hz,
        aspect_shift=s.aspect_shifts[chrom.aspect_idx],
        regfile_scale=s.regfile_scales[chrom.regfile_scale_idx],
        gbuf_scale=s.gbuf_scales[chrom.gbuf_scale_idx],
        variant_id=variant.id,
    )
    return config, variant


def evaluate(chrom: Chromosome, ctx: EvalContext) -> EvalResult:
    config, variant = decode(chrom, ctx)
    area = accelerator_area(config, variant, ctx.area_lib)
    embodied = embodied_carbon(area, ctx.tech).embodied
    drop = accuracy_drop(variant, ctx.network, ctx.accuracy)
    try:
        perf = workload_latency(ctx.workload, config)
    except InfeasibleMappingError:
        return EvalResult(embodied, INF, 0.0, drop, INF, False, area, config.pes, config)
    feasible = perf.fps >= ctx.fps_min and drop <= ctx.drop_max
    return EvalResult(
        embodied=embodied,
        latency_s=perf.latency_s,
        fps=perf.fps,
        accuracy_drop=drop,
        cdp=cdp(embodied, perf.latency_s),
        feasible=feasible,
        area_mm2=area,
        pes=config.pes,
        config=config,
    )


def _rank_key(chrom: Chromosome, r: EvalResult):
    # feasible first, then lower CDP, then lexicographic genes
    return (not r.feasible, r.cdp, tuple(chrom))


class _Evaluator:
    def __init__(self, ctx: EvalContext, workers: int = 1):
        self.ctx = ctx
        self.workers = workers
        self.cache: dict[Chromosome, EvalResult] = {}

    def __call__(self, chroms: Sequence[Chromosome]) -> list[EvalResult]:
        todo = list(dict.fromkeys(c for c in chroms if c not in self.cache))
        if self.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as ex:
                results = list(ex.map(lambda c: evaluate(c, self.ctx), todo))
        else:
            results = [evaluate(c, self.ctx) for c in todo]
        self.cache.update(zip(todo, results))
        return [self.cache[c] for c in chroms]


def infeasibility(ctx: EvalContext, results: Sequence[EvalResult]) -> InfeasibleError:
    mapped = [r for r in results if r.latency_s < INF]
    if not mapped:
        return InfeasibleError("mapping", "no evaluated design could map the workload")
    best_fps = max(r.fps for r in mapped)
    best_drop = min(r.accuracy_drop for r in mapped)
    fps_bad = best_fps < ctx.fps_min
    drop_bad = best_drop > ctx.drop_max
    detail = f"best fps {best_fps:.3f} vs fps_min {ctx.fps_min}; best drop {best_drop:.3f}% vs drop_max {ctx.drop_max}%"
    if fps_bad and not drop_bad:
        return InfeasibleError("fps_min", detail)
    if drop_bad and not fps_bad:
        return InfeasibleError("drop_max", detail)
    return InfeasibleError("fps_min+drop_max", detail)


def optimize(ctx: EvalContext, ga: GaParams | None = None, workers: int = 1) -> OptimizeResult:
    """Genetic search for the feasible design with the lowest CDP.

    The initial population holds the exact-multiplier baseline of every PE
    size plus random chromosomes.  Selection is a k-way tournament ranking
    any feasible design above any infeasible one, then by CDP.  The best
    feasible design ever evaluated is returned.
    """
    ga = ga or GaParams()
    space = ctx.space
    sizes = space.ladder_sizes
    n_genes = len(sizes)
    mut_p = ga.mutation_p if ga.mutation_p is not None else 1.0 / n_genes
    rng = np.random.default_rng(ga.seed)
    evaluator = _Evaluator(ctx, workers)

    pop = list(dict.fromkeys(space.baselines()))[: ga.population]
    while len(pop) < ga.population:
        pop.append(Chromosome(*(int(rng.integers(0, n)) for n in sizes)))
    fit = evaluator(pop)

    best: tuple | None = None

    def update_best(chroms, results):
        nonlocal best
        for c, r in zip(chroms, results):
            if r.feasible and (best is None or _rank_key(c, r) < _rank_key(*best)):
                best = (c, r)

    update_best(pop, fit)
    history = [best[1].cdp if best else INF]

    for _ in range(ga.generations):
        keys = [_rank_key(c, r) for c, r in zip(pop, fit)]
        order = sorted(range(len(pop)), key=keys.__getitem__)
        elites = []
        for i in order:
            if pop[i] not in elites:
                elites.append(pop[i])
            if len(elites) == ga.elitism:
                break
        n_children = ga.population - len(elites)
        n_pairs = (n_children + 1) // 2

        # every random draw of the generation precedes evaluation
        contenders = rng.integers(0, len(pop), size=(2 * n_pairs, ga.tournament_k))
        do_cross = rng.random(n_pairs) < ga.crossover_p
        masks = rng.random((n_pairs, n_genes)) < 0.5
        mutate = rng.random((2 * n_pairs, n_genes)) < mut_p
        offsets = rng.random((2 * n_pairs, n_genes))

        parents = [pop[min(row, key=lambda i: keys[i])] for row in contenders]
        children = []
        for p in range(n_pairs):
            a, b = parents[2 * p], parents[2 * p + 1]
            if do_cross[p]:
                ca = [x if m else y for x, y, m in zip(a, b, masks[p])]
                cb = [y if m else x for x, y, m in zip(a, b, masks[p])]
            else:
                ca, cb = list(a), list(b)
            children.extend([ca, cb])
        for j, child in enumerate(children):
            for g in range(n_genes):
                if mutate[j, g] and sizes[g] > 1:
                    # uniform over the other indices of the ladder
                    step = 1 + int(offsets[j, g] * (sizes[g] - 1))
                    child[g] = (child[g] + step) % sizes[g]
        children = [Chromosome(*c) for c in children[:n_children]]

        child_fit = evaluator(children)
        update_best(children, child_fit)
        pop = elites + children
        fit = evaluator(pop)
        history.append(best[1].cdp if best else INF)

    if best is None:
        raise infeasibility(ctx, list(evaluator.cache.values()))
    return OptimizeResult(best[0], best[1], history, len(evaluator.cache))


def exhaustive_search(ctx: EvalContext, budget: int = EXHAUSTIVE_BUDGET) -> tuple[Chromosome, EvalResult]:
    """Evaluate every chromosome of ``ctx.space``; same ranking as the GA."""
    if ctx.space.size > budget:
        raise BudgetError(f"search space has {ctx.space.size} points, budget is {budget}")
    best = None
    results = []
    for chrom in ctx.space.chromosomes():
        r = evaluate(chrom, ctx)
        results.append(r)
        if r.feasible and (best is None or _rank_key(chrom, r) < _rank_key(*best)):
            best = (chrom, r)
    if best is None:
        raise infeasibility(ctx, results)
    return best


def baseline_designs(ctx: EvalContext) -> list[tuple[Chromosome, EvalResult]]:
    return [(c, evaluate(c, ctx)) for c in ctx.space.baselines()]
