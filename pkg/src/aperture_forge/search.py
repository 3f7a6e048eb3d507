"""NSGA-II over 49-bit aperture chromosomes, minimizing the worst-case
deblurring error R and maximizing the worst-case wrong-kernel distance D
(as min {R, -D}).

Standard binary-GA machinery: binary tournament selection on
(rank, crowding), uniform crossover, per-bit flip mutation with a repair
step guaranteeing at least one open cell, and elitist (mu + lambda)
survival by non-dominated fronts with crowding-distance truncation. The
final pattern is picked from the last front by flip distance D_r.
"""

from dataclasses import dataclass

import numpy as np

from .imaging import AperturePattern, ApertureError, GRID_N
from .metrics import PatternScores
from ._parallel import parallel_map

N_BITS = GRID_N * GRID_N


@dataclass(frozen=True)
class GaConfig:
    """Search budget and variation rates."""

    population_size: int = 1500
    generations: int = 100
    crossover_prob: float = 0.9
    mutation_prob: float = 1.0 / N_BITS
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2 != 0:
            raise ApertureError("population size must be even and at least 4")
        if self.generations < 0:
            raise ApertureError("generations must be non-negative")
        if not (0.0 <= self.crossover_prob <= 1.0 and 0.0 <= self.mutation_prob <= 1.0):
            raise ApertureError("variation probabilities must lie in [0, 1]")


@dataclass
class Individual:
    """One chromosome with its objectives and NSGA-II bookkeeping."""

    bits: tuple                       # 49 booleans, row-major
    objectives: tuple                 # (r_max, -d_min), both minimized
    rank: int = 0
    crowding: float = 0.0

    def pattern(self) -> AperturePattern:
        return AperturePattern.from_bits(self.bits)


def dominates(a: Individual, b: Individual) -> bool:
    """Pareto dominance: no objective worse, at least one strictly better."""
    if len(a.objectives) != len(b.objectives):
        raise ApertureError("objective counts differ")
    not_worse = all(x <= y for x, y in zip(a.objectives, b.objectives))
    strictly_better = any(x < y for x, y in zip(a.objectives, b.objectives))
    return not_worse and strictly_better


def non_dominated_sort(population) -> list:
    """Partition a population into non-domination fronts (front 0 first).

    Vectorized peeling: repeatedly remove the set of individuals that no
    remaining individual dominates.
    """
    population = list(population)
    if not population:
        raise ApertureError("population is empty")
    objs = np.array([ind.objectives for ind in population], dtype=np.float64)
    remaining = np.arange(len(population))
    fronts = []
    rank = 0
    while remaining.size:
        z = objs[remaining]
        # dominated[i] = any j with z_j <= z_i everywhere and < somewhere
        leq = np.all(z[:, None, :] <= z[None, :, :], axis=2)
        lt = np.any(z[:, None, :] < z[None, :, :], axis=2)
        dominated = np.any(leq & lt, axis=0)
        front_idx = remaining[~dominated]
        for i in front_idx:
            population[i].rank = rank
        fronts.append([population[i] for i in front_idx])
        remaining = remaining[dominated]
        rank += 1
    return fronts


def crowding_distance(front) -> None:
    """Assign NSGA-II crowding distances within one front, in place.

    Boundary individuals per objective get infinity; interior ones sum the
    normalized gaps between their neighbors. Ties are ordered stably.
    """
    front = list(front)
    if not front:
        raise ApertureError("front is empty")
    for ind in front:
        ind.crowding = 0.0
    n = len(front)
    if n <= 2:
        for ind in front:
            ind.crowding = float("inf")
        return
    n_obj = len(front[0].objectives)
    for m in range(n_obj):
        values = np.array([ind.objectives[m] for ind in front])
        order = np.argsort(values, kind="stable")
        front[order[0]].crowding = float("inf")
        front[order[-1]].crowding = float("inf")
        span = values[order[-1]] - values[order[0]]
        if span <= 0:
            continue
        for k in range(1, n - 1):
            ind = front[order[k]]
            if ind.crowding != float("inf"):
                ind.crowding += (values[order[k + 1]] - values[order[k - 1]]) / span


def _repair(bits: np.ndarray, rng: np.random.Generator) -> None:
    if not bits.any():
        bits[rng.integers(0, N_BITS)] = True


def _evaluate(bit_rows, scorer, cache) -> list:
    """Score chromosomes through the cache; new ones go through the scorer
    (parallel across individuals, which are pure work items)."""
    keys = []
    fresh = []
    pending = set()
    for row in bit_rows:
        key = np.packbits(row).tobytes()
        keys.append(key)
        if key not in cache and key not in pending:
            pending.add(key)
            fresh.append((key, row))
    if fresh:
        scores = parallel_map(lambda kr: scorer(AperturePattern.from_bits(kr[1])), fresh)
        for (key, _), score in zip(fresh, scores):
            cache[key] = score
    individuals = []
    for key, row in zip(keys, bit_rows):
        s: PatternScores = cache[key]
        individuals.append(Individual(bits=tuple(bool(b) for b in row),
                                      objectives=(s.r_max, -s.d_min)))
    return individuals


def _tournament(pop, rng) -> Individual:
    i, j = rng.integers(0, len(pop), 2)
    a, b = pop[i], pop[j]
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a


def _survivors(fronts, size) -> list:
    chosen = []
    for front in fronts:
        crowding_distance(front)
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
        else:
            order = sorted(range(len(front)),
                           key=lambda k: (-front[k].crowding, k))
            chosen.extend(front[k] for k in order[: size - len(chosen)])
            break
    return chosen


def evolve(cfg: GaConfig, scorer, cache: dict | None = None) -> list:
    """Run the search; returns front 0 of the final merged population.

    ``scorer`` maps an AperturePattern to PatternScores and must be pure;
    identical chromosomes are scored once through the cache. The whole run
    is a deterministic function of the configuration seed.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    cache = {} if cache is None else cache
    pop_bits = rng.random((cfg.population_size, N_BITS)) < 0.5
    for row in pop_bits:
        _repair(row, rng)
    population = _evaluate(list(pop_bits), scorer, cache)
    fronts = non_dominated_sort(population)
    if cfg.generations == 0:
        return fronts[0]
    for front in fronts:
        crowding_distance(front)

    merged = population
    for _ in range(cfg.generations):
        children_bits = []
        while len(children_bits) < cfg.population_size:
            pa = np.array(_tournament(population, rng).bits, dtype=bool)
            pb = np.array(_tournament(population, rng).bits, dtype=bool)
            if rng.random() < cfg.crossover_prob:
                mask = rng.random(N_BITS) < 0.5
                ca = np.where(mask, pa, pb)
                cb = np.where(mask, pb, pa)
            else:
                ca, cb = pa.copy(), pb.copy()
            for child in (ca, cb):
                flip = rng.random(N_BITS) < cfg.mutation_prob
                child ^= flip
                _repair(child, rng)
                children_bits.append(child)
        children = _evaluate(children_bits[: cfg.population_size], scorer, cache)
        merged = population + children
        fronts = non_dominated_sort(merged)
        population = _survivors(fronts, cfg.population_size)
    return non_dominated_sort(merged)[0]


def select_final(front, scorer) -> AperturePattern:
    """Pick the front member with the largest flip distance d_r_min.

    Ties break toward smaller r_max, then lexicographic bit order, so the
    choice is deterministic. Asymmetric patterns are the only ones with a
    positive flip distance, so they win whenever the front offers one.
    """
    front = list(front)
    if not front:
        raise ApertureError("front is empty")
    ranked = []
    for ind in front:
        scores = scorer(ind.pattern())
        ranked.append((-scores.d_r_min, scores.r_max, ind.bits, ind))
    ranked.sort(key=lambda t: (t[0], t[1], t[2]))
    return ranked[0][3].pattern()
