"""NSGA-II baseline over integer assignment chromosomes.

Runs on the same predicted-accuracy matrix as the heuristic search so the
two optimizers are compared purely on search strategy. The two analytic
extreme solutions are injected into the initial population by default
(toggleable) so the baseline starts from the same anchors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ObjectivePoint, SolutionArchive, make_solution, pareto_filter
from .errors import ValidationError
from .optimizer import _check_pair, best_accuracy_assignment, cheapest_assignment


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1/n
    seed: int = 0
    inject_extremes: bool = True

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2 != 0:
            raise ValidationError(
                f"population_size must be even and >= 2, got {self.population_size}"
            )
        if self.generations < 1:
            raise ValidationError(f"generations must be >= 1, got {self.generations}")
        if not (0.0 <= self.crossover_rate <= 1.0):
            raise ValidationError(f"crossover_rate must be in [0,1], got {self.crossover_rate}")
        if self.mutation_rate is not None and not (0.0 <= self.mutation_rate <= 1.0):
            raise ValidationError(f"mutation_rate must be in [0,1], got {self.mutation_rate}")


def _domination_matrix(costs: np.ndarray, accs: np.ndarray) -> np.ndarray:
    """dom[i, j] == True iff point i dominates point j."""
    c_le = costs[:, None] <= costs[None, :]
    c_lt = costs[:, None] < costs[None, :]
    a_ge = accs[:, None] >= accs[None, :]
    a_gt = accs[:, None] > accs[None, :]
    return (c_le & a_gt) | (c_lt & a_ge)


def non_dominated_sort(points: list[ObjectivePoint]) -> list[list[int]]:
    """Fast non-dominated sort; front r is dominated only by fronts < r."""
    if not points:
        return []
    costs = np.array([p.cost for p in points])
    accs = np.array([p.accuracy for p in points])
    return _sort_fronts(costs, accs)


def _sort_fronts(costs: np.ndarray, accs: np.ndarray) -> list[list[int]]:
    dom = _domination_matrix(costs, accs)
    counts = dom.sum(axis=0).astype(np.int64)
    fronts = []
    current = np.where(counts == 0)[0]
    while current.size:
        fronts.append([int(i) for i in current])
        counts[current] = -1
        counts -= dom[current].sum(axis=0)
        current = np.where(counts == 0)[0]
    return fronts


def _crowding(costs: np.ndarray, accs: np.ndarray) -> np.ndarray:
    k = costs.shape[0]
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
        return dist
    for obj in (costs, accs):
        order = np.argsort(obj, kind="mergesort")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = obj[order[-1]] - obj[order[0]]
        if span > 0:
            dist[order[1:-1]] += (obj[order[2:]] - obj[order[:-2]]) / span
    return dist


def _rank_and_crowd(costs: np.ndarray, accs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fronts = _sort_fronts(costs, accs)
    rank = np.empty(costs.shape[0], dtype=np.int64)
    crowd = np.empty(costs.shape[0])
    for r, front in enumerate(fronts):
        idx = np.array(front)
        rank[idx] = r
        crowd[idx] = _crowding(costs[idx], accs[idx])
    return rank, crowd


def _batch_objectives(pop: np.ndarray, C: np.ndarray, P: np.ndarray):
    """Population objectives with the same ascending-index accumulation as
    core.evaluate, vectorized across individuals."""
    n = pop.shape[1]
    costs = np.zeros(pop.shape[0])
    accs = np.zeros(pop.shape[0])
    for i in range(n):
        costs += C[i, pop[:, i]]
        accs += P[i, pop[:, i]]
    return costs, accs / n


def nsga2(P, C, config: GAConfig | None = None) -> SolutionArchive:
    """Elitist NSGA-II; returns the non-dominated set of the final population."""
    config = config or GAConfig()
    Pv, Cv = _check_pair(P, C)
    n, m = Pv.shape
    pop_size = config.population_size
    mut_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / n
    rng = np.random.default_rng(config.seed & 0xFFFFFFFFFFFFFFFF)

    pop = rng.integers(0, m, size=(pop_size, n), dtype=np.int64)
    if config.inject_extremes:
        pop[0] = cheapest_assignment(Cv, Pv)
        pop[1] = best_accuracy_assignment(Pv, Cv)
    costs, accs = _batch_objectives(pop, Cv, Pv)

    for _ in range(config.generations):
        rank, crowd = _rank_and_crowd(costs, accs)

        # binary tournament on (rank, crowding distance)
        cand = rng.integers(0, pop_size, size=(pop_size, 2))
        a, b = cand[:, 0], cand[:, 1]
        a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
        parents = np.where(a_wins, a, b)

        offspring = pop[parents].copy()
        do_cx = rng.random(pop_size // 2) < config.crossover_rate
        masks = rng.random((pop_size // 2, n)) < 0.5
        for p in range(pop_size // 2):
            if do_cx[p]:
                i, j = 2 * p, 2 * p + 1
                swap = masks[p]
                tmp = offspring[i, swap].copy()
                offspring[i, swap] = offspring[j, swap]
                offspring[j, swap] = tmp

        mut_mask = rng.random((pop_size, n)) < mut_rate
        n_mut = int(mut_mask.sum())
        if n_mut:
            offspring[mut_mask] = rng.integers(0, m, size=n_mut, dtype=np.int64)

        off_costs, off_accs = _batch_objectives(offspring, Cv, Pv)

        all_pop = np.concatenate([pop, offspring])
        all_costs = np.concatenate([costs, off_costs])
        all_accs = np.concatenate([accs, off_accs])
        all_rank, all_crowd = _rank_and_crowd(all_costs, all_accs)
        # fill by front, truncating the boundary front by crowding distance
        order = np.lexsort((-all_crowd, all_rank))
        keep = order[:pop_size]
        pop = all_pop[keep]
        costs = all_costs[keep]
        accs = all_accs[keep]

    return pareto_filter(make_solution(chrom, Cv, Pv) for chrom in pop)
