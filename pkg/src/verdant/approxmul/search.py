"""NSGA-II exploration of pruned / precision-scaled multiplier variants.

A chromosome holds one gene per gate of the exact netlist (0 keep,
1 tie to CONST0, 2 tie to CONST1) followed by the precision-scaling
amount ``k``.  Objectives are (area, MRED), both minimized.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from verdant.accuracy import AccuracyModel, accuracy_drop
from verdant.approxmul.metrics import EXACT, ErrorMetrics, error_metrics
from verdant.approxmul.netlist import Netlist, apply_approximation

log = logging.getLogger(__name__)

_REPLACEMENT = {1: "CONST0", 2: "CONST1"}


@dataclass(frozen=True)
class MultiplierVariant:
    id: str
    netlist: Netlist
    area: float
    metrics: ErrorMetrics
    cuts: tuple[tuple[int, str], ...] = ()
    k: int = 0

    @property
    def is_exact(self) -> bool:
        return self.metrics.is_exact

    @property
    def provenance(self) -> dict:
        return {"cuts": [[gid, rep] for gid, rep in self.cuts], "k": self.k}


def make_variant(
    base: Netlist,
    cuts: Mapping[int, str] | Sequence[tuple[int, str]] = (),
    k: int = 0,
    id: str = "",
    gate_area: Mapping[str, float] | None = None,
) -> MultiplierVariant:
    cuts = dict(cuts)
    net = apply_approximation(base, cuts, k)
    metrics = error_metrics(net)
    return MultiplierVariant(
        id=id,
        netlist=net,
        area=net.area(gate_area),
        metrics=metrics,
        cuts=tuple(sorted(cuts.items())),
        k=k,
    )


def exact_variant(base: Netlist, id: str = "", gate_area=None) -> MultiplierVariant:
    return MultiplierVariant(id=id, netlist=base, area=base.area(gate_area), metrics=EXACT)


@dataclass
class SearchParams:
    population: int = 64
    generations: int = 50
    crossover_p: float = 0.9
    mutation_p: float | None = None  # None -> 2 / number of gates
    seed: int = 0
    workers: int = 1


@dataclass
class _Evaluated:
    genes: bytes
    area: float
    mred: float
    variant: MultiplierVariant = field(repr=False)


def dominates(p: Sequence[float], q: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(p, q)) and any(x < y for x, y in zip(p, q))


def non_dominated_sort(objs: Sequence[Sequence[float]]) -> list[list[int]]:
    """Fronts of indices, best first (Deb's fast non-dominated sort)."""
    n = len(objs)
    dominated_by = [[] for _ in range(n)]
    count = [0] * n
    fronts: list[list[int]] = [[]]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if dominates(objs[i], objs[j]):
                dominated_by[i].append(j)
            elif dominates(objs[j], objs[i]):
                count[i] += 1
        if count[i] == 0:
            fronts[0].append(i)
    while fronts[-1]:
        nxt = []
        for i in fronts[-1]:
            for j in dominated_by[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        fronts.append(sorted(nxt))
    return fronts[:-1]


def crowding_distance(objs: Sequence[Sequence[float]], front: Sequence[int]) -> dict[int, float]:
    dist = {i: 0.0 for i in front}
    if len(front) <= 2:
        return {i: float("inf") for i in front}
    for m in range(len(objs[front[0]])):
        order = sorted(front, key=lambda i: (objs[i][m], i))
        lo, hi = objs[order[0]][m], objs[order[-1]][m]
        dist[order[0]] = dist[order[-1]] = float("inf")
        if hi == lo:
            continue
        for a, i, b in zip(order, order[1:], order[2:]):
            dist[i] += (objs[b][m] - objs[a][m]) / (hi - lo)
    return dist


class _Problem:
    def __init__(self, base: Netlist, gate_area):
        self.base = base
        self.gate_ids = base.gate_ids()
        self.gate_area = gate_area
        self.cache: dict[bytes, _Evaluated] = {}

    @property
    def n_genes(self) -> int:
        return len(self.gate_ids) + 1

    def decode(self, genes: np.ndarray) -> tuple[dict[int, str], int]:
        cuts = {self.gate_ids[i]: _REPLACEMENT[int(g)] for i, g in enumerate(genes[:-1]) if g}
        return cuts, int(genes[-1])

    def _evaluate(self, genes: np.ndarray) -> _Evaluated:
        cuts, k = self.decode(genes)
        v = make_variant(self.base, cuts, k, gate_area=self.gate_area)
        return _Evaluated(genes.tobytes(), v.area, v.metrics.mred, v)

    def evaluate_all(self, pop: Sequence[np.ndarray], workers: int = 1) -> list[_Evaluated]:
        todo = {}
        for g in pop:
            key = g.tobytes()
            if key not in self.cache and key not in todo:
                todo[key] = g
        if workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(self._evaluate, todo.values()))
        else:
            results = [self._evaluate(g) for g in todo.values()]
        for key, r in zip(todo, results):
            self.cache[key] = r
        return [self.cache[g.tobytes()] for g in pop]


def _initial_population(problem: _Problem, size: int, rng: np.random.Generator, initial) -> list[np.ndarray]:
    B = problem.base.bitwidth
    n = problem.n_genes
    pop = []
    for genes in initial or [np.zeros(n, dtype=np.int8)]:
        genes = np.asarray(genes, dtype=np.int8)
        if genes.shape != (n,):
            raise ValueError(f"chromosome must have {n} genes")
        pop.append(genes)
    for k in range(1, B + 1):
        if len(pop) >= size or initial:
            break
        g = np.zeros(n, dtype=np.int8)
        g[-1] = k
        pop.append(g)
    while len(pop) < size:
        g = np.zeros(n, dtype=np.int8)
        if len(pop) % 2:
            # a handful of cuts on an otherwise exact circuit
            hit = rng.choice(n - 1, size=int(rng.integers(1, 4)), replace=False)
            g[hit] = rng.integers(1, 3, hit.size)
        else:
            density = rng.uniform(0.0, 0.05)
            g[:-1] = np.where(rng.random(n - 1) < density, rng.integers(1, 3, n - 1), 0)
            g[-1] = 0 if rng.random() < 0.5 else int(rng.integers(1, B // 2 + 1))
        pop.append(g)
    return pop[:size]


def _select(objs, ranks, crowd, rng, n_picks) -> list[int]:
    """Binary tournaments on (rank, -crowding); ties go to the lower index."""
    picks = rng.integers(0, len(objs), size=(n_picks, 2))
    out = []
    for i, j in picks:
        ki = (ranks[i], -crowd[i], i)
        kj = (ranks[j], -crowd[j], j)
        out.append(int(i) if ki <= kj else int(j))
    return out


def _rank_and_crowd(objs):
    fronts = non_dominated_sort(objs)
    ranks = [0] * len(objs)
    crowd = [0.0] * len(objs)
    for r, front in enumerate(fronts):
        for i in front:
            ranks[i] = r
        for i, d in crowding_distance(objs, front).items():
            crowd[i] = d
    return fronts, ranks, crowd


def pareto_search(
    base: Netlist,
    params: SearchParams | None = None,
    initial: Sequence[np.ndarray] | None = None,
    gate_area: Mapping[str, float] | None = None,
) -> list[MultiplierVariant]:
    """Run NSGA-II from the exact netlist ``base`` and return the Pareto front.

    The front is the non-dominated set over every variant evaluated during
    the run, sorted by ascending area, one variant per objective point.  The
    exact multiplier is always part of the initial population, so it is
    always on the returned front.  ``generations`` counts the initial
    population as the first generation.
    """
    params = params or SearchParams()
    if params.population < 1 or params.generations < 1:
        raise ValueError("population and generations must be positive")
    problem = _Problem(base, gate_area)
    n = problem.n_genes
    B = base.bitwidth
    mut_p = params.mutation_p if params.mutation_p is not None else 2.0 / (n - 1)
    rng = np.random.default_rng(params.seed)

    pop = _initial_population(problem, params.population, rng, initial)
    if not initial:
        pop[0] = np.zeros(n, dtype=np.int8)
    evaluated = problem.evaluate_all(pop, params.workers)
    archive: dict[bytes, _Evaluated] = {e.genes: e for e in evaluated}

    for gen in range(1, params.generations):
        objs = [(e.area, e.mred) for e in evaluated]
        _, ranks, crowd = _rank_and_crowd(objs)
        size = len(pop)
        # all random draws for this generation happen before evaluation
        parents = _select(objs, ranks, crowd, rng, 2 * ((size + 1) // 2))
        children = []
        for a, b in zip(parents[::2], parents[1::2]):
            pa, pb = pop[a], pop[b]
            if rng.random() < params.crossover_p:
                mask = rng.random(n) < 0.5
                ca, cb = np.where(mask, pa, pb), np.where(mask, pb, pa)
            else:
                ca, cb = pa.copy(), pb.copy()
            children.extend([ca, cb])
        for c in children:
            hit = np.flatnonzero(rng.random(n) < mut_p)
            for i in hit:
                if i == n - 1:
                    c[i] = (int(c[i]) + int(rng.integers(1, B + 1))) % (B + 1)
                else:
                    c[i] = (int(c[i]) + int(rng.integers(1, 3))) % 3
        children = children[:size]
        child_eval = problem.evaluate_all(children, params.workers)
        for e in child_eval:
            archive.setdefault(e.genes, e)

        # environmental selection over unique chromosomes of parents + children
        pool, pool_eval, seen = [], [], set()
        for g, e in zip(pop + children, evaluated + child_eval):
            if e.genes not in seen:
                seen.add(e.genes)
                pool.append(g)
                pool_eval.append(e)
        objs = [(e.area, e.mred) for e in pool_eval]
        fronts, _, _ = _rank_and_crowd(objs)
        chosen: list[int] = []
        for front in fronts:
            if len(chosen) + len(front) <= size:
                chosen.extend(front)
                continue
            crowd = crowding_distance(objs, front)
            rest = sorted(front, key=lambda i: (-crowd[i], i))
            chosen.extend(rest[: size - len(chosen)])
            break
        # pad with duplicates if the unique pool is too small
        while len(chosen) < size:
            chosen.append(chosen[len(chosen) % max(1, len(chosen))])
        pop = [pool[i] for i in chosen]
        evaluated = [pool_eval[i] for i in chosen]
        log.debug("generation %d: archive %d", gen, len(archive))

    return _front_of(list(archive.values()), B)


def _front_of(entries: list[_Evaluated], bitwidth: int) -> list[MultiplierVariant]:
    objs = [(e.area, e.mred) for e in entries]
    first = non_dominated_sort(objs)[0]
    best: dict[tuple[float, float], _Evaluated] = {}
    for i in first:
        e = entries[i]
        key = (e.area, e.mred)
        # one representative per objective point; prefer fewer cuts, then gene bytes
        if key not in best or (_n_cuts(e), e.genes) < (_n_cuts(best[key]), best[key].genes):
            best[key] = e
    front = []
    for i, key in enumerate(sorted(best)):
        v = best[key].variant
        vid = f"m{bitwidth}_exact" if v.is_exact else f"m{bitwidth}_{i:03d}"
        front.append(
            MultiplierVariant(vid, v.netlist, v.area, v.metrics, v.cuts, v.k)
        )
    return front


def _n_cuts(e: _Evaluated) -> int:
    return len(e.variant.cuts) + e.variant.k


def filter_by_accuracy(
    front: Sequence[MultiplierVariant],
    model: AccuracyModel,
    threshold_pct: float,
    network: str | None = None,
) -> list[MultiplierVariant]:
    """Variants whose estimated accuracy drop is within ``threshold_pct``."""
    if threshold_pct < 0:
        raise ValueError("threshold_pct must be >= 0")
    return [
        v for v in front if v.is_exact or accuracy_drop(v, network, model) <= threshold_pct
    ]
