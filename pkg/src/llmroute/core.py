"""Domain types, objective evaluation, and Pareto-dominance machinery.

Objectives are a pair: total invocation cost (minimize) and fraction of
queries answered correctly (maximize). Sums over queries always accumulate
in ascending query index so that identical inputs produce bit-identical
objective values, which lets archives deduplicate by exact equality.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class Query:
    """One unit of work: a batch item to be routed to a single LLM."""

    id: int
    token_count: int
    text: str | None = None
    features: np.ndarray | None = None

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"query id must be non-negative, got {self.id}")
        if self.token_count < 0:
            raise ValidationError(
                f"query {self.id}: token_count must be non-negative, got {self.token_count}"
            )
        if self.features is not None:
            f = _freeze(self.features)
            if f.ndim != 1:
                raise ShapeError(f"query {self.id}: features must be a 1-d vector")
            if not np.all(np.isfinite(f)):
                raise ValidationError(f"query {self.id}: features contain non-finite entries")
            object.__setattr__(self, "features", f)


@dataclass(frozen=True)
class LLMCandidate:
    """A priced model endpoint."""

    id: int
    name: str
    price_per_token: float

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"llm id must be non-negative, got {self.id}")
        if not (self.price_per_token >= 0):
            raise ValidationError(
                f"llm {self.id} ({self.name}): price_per_token must be >= 0, "
                f"got {self.price_per_token}"
            )


def _freeze(values, dtype=np.float64) -> np.ndarray:
    # always copy so freezing never aliases (or locks) a caller's buffer
    arr = np.array(values, dtype=dtype, order="C", copy=True)
    arr.setflags(write=False)
    return arr


def as_matrix(x) -> np.ndarray:
    """Accept a matrix wrapper or a raw array; return a float64 2-d ndarray."""
    values = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got ndim={values.ndim}")
    return values


@dataclass(frozen=True)
class CostMatrix:
    """Per-query per-LLM invocation cost, shape (n, m)."""

    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.ndim != 2:
            raise ShapeError(f"cost matrix must be 2-d, got ndim={v.ndim}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("cost matrix contains non-finite entries")
        if v.size and v.min() < 0:
            raise ValidationError("cost matrix contains negative entries")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class LabelMatrix:
    """Ground-truth correctness, shape (n, m), entries exactly 0 or 1."""

    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.ndim != 2:
            raise ShapeError(f"label matrix must be 2-d, got ndim={v.ndim}")
        if v.size and not np.all((v == 0.0) | (v == 1.0)):
            bad = np.argwhere((v != 0.0) & (v != 1.0))[0]
            raise ValidationError(
                f"label matrix entry ({bad[0]}, {bad[1]}) is not binary: {v[bad[0], bad[1]]}"
            )
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class ObjectivePoint:
    """A (total cost, overall accuracy) pair."""

    cost: float
    accuracy: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.cost, self.accuracy)


@dataclass(frozen=True)
class Solution:
    """A full assignment (query i -> LLM assignment[i]) with cached objectives."""

    assignment: np.ndarray
    objectives: ObjectivePoint

    def __post_init__(self):
        a = _freeze(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise ShapeError("assignment must be a 1-d index vector")
        object.__setattr__(self, "assignment", a)


@njit(cache=True)
def _picked_sum_nb(M, a):
    total = 0.0
    for i in range(a.shape[0]):
        total += M[i, a[i]]
    return total


def _picked_sum_np(M, a):
    n = a.shape[0]
    if n == 0:
        return 0.0
    picked = M[np.arange(n), a]
    # add.accumulate is a strict left-to-right scan: same rounding as the loop
    return float(np.add.accumulate(picked)[-1])


_picked_sum = pick(_picked_sum_nb, _picked_sum_np)


def picked_sum(M: np.ndarray, assignment: np.ndarray) -> float:
    """Sum M[i, assignment[i]] in ascending query index."""
    return float(_picked_sum(M, assignment))


def evaluate(solution, costs, acc) -> ObjectivePoint:
    """Objective point of an assignment under a cost matrix and an accuracy matrix.

    ``acc`` may be a binary LabelMatrix (true objectives) or a prediction
    matrix (predicted objectives); both share the same averaging form.
    """
    a = solution.assignment if isinstance(solution, Solution) else np.asarray(solution, dtype=np.int64)
    C = as_matrix(costs)
    P = as_matrix(acc)
    if C.shape != P.shape:
        raise ShapeError(f"cost shape {C.shape} != accuracy shape {P.shape}")
    n, m = C.shape
    if a.shape != (n,):
        raise ShapeError(f"assignment length {a.shape} does not match n={n}")
    if n and (a.min() < 0 or a.max() >= m):
        raise ValidationError("assignment contains out-of-range LLM indices")
    cost = picked_sum(C, a)
    accuracy = picked_sum(P, a) / n if n else 0.0
    return ObjectivePoint(cost=cost, accuracy=accuracy)


def make_solution(assignment, costs, acc) -> Solution:
    """Build a Solution with objectives freshly evaluated."""
    a = np.asarray(assignment, dtype=np.int64)
    return Solution(assignment=a, objectives=evaluate(a, costs, acc))


def compute_cost_matrix(queries: list[Query], llms: list[LLMCandidate]) -> CostMatrix:
    """Cost of every (query, LLM) pair: token_count * price_per_token."""
    if not queries or not llms:
        raise ValidationError("invalid instance: need at least one query and one LLM")
    tokens = np.array([q.token_count for q in queries], dtype=np.float64)
    prices = np.array([l.price_per_token for l in llms], dtype=np.float64)
    return CostMatrix(np.outer(tokens, prices))


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    """True iff a is at least as good as b in both objectives and better in one."""
    return (a.cost <= b.cost and a.accuracy > b.accuracy) or (
        a.cost < b.cost and a.accuracy >= b.accuracy
    )


class SolutionArchive:
    """Mutually non-dominated solutions, deduplicated, sorted by ascending cost.

    Because members never dominate each other and exact duplicates are
    rejected, accuracy is strictly ascending along the cost ordering.
    """

    def __init__(self, members=None):
        self._members: list[Solution] = []
        self._costs: list[float] = []
        if members:
            for s in members:
                self.add(s)

    @property
    def members(self) -> list[Solution]:
        return list(self._members)

    def __len__(self):
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def __eq__(self, other):
        if not isinstance(other, SolutionArchive):
            return NotImplemented
        if len(self) != len(other):
            return False
        return all(
            a.objectives == b.objectives and np.array_equal(a.assignment, b.assignment)
            for a, b in zip(self._members, other._members)
        )

    def add(self, solution: Solution) -> bool:
        """Insert unless dominated or an exact objective duplicate; prune losers.

        Returns True when the solution entered the archive.
        """
        p = solution.objectives
        for member in self._members:
            q = member.objectives
            if q.cost == p.cost and q.accuracy == p.accuracy:
                return False
            if dominates(q, p):
                return False
        keep = [m for m in self._members if not dominates(p, m.objectives)]
        if len(keep) != len(self._members):
            self._members = keep
            self._costs = [m.objectives.cost for m in keep]
        idx = bisect.bisect_left(self._costs, p.cost)
        self._members.insert(idx, solution)
        self._costs.insert(idx, p.cost)
        return True

    def objective_array(self) -> np.ndarray:
        """Member objectives as an (k, 2) array of (cost, accuracy) rows."""
        return np.array(
            [[s.objectives.cost, s.objectives.accuracy] for s in self._members],
            dtype=np.float64,
        ).reshape(len(self._members), 2)

    def min_cost(self) -> Solution:
        return self._members[0]

    def max_accuracy(self) -> Solution:
        return self._members[-1]


def pareto_filter(solutions) -> SolutionArchive:
    """Archive of the non-dominated input solutions.

    Exact objective duplicates collapse to the first occurrence in input
    order.
    """
    archive = SolutionArchive()
    for s in solutions:
        archive.add(s)
    return archive
