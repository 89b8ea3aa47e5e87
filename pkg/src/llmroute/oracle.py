"""Ground-truth Pareto front oracles.

The brute-force oracle enumerates every assignment (guarded by a cap) and
is meant for tests; the incremental oracle builds the reference chain used
on full-size instances: start all-cheapest, then repeatedly fix the
unsolved query with the smallest cost delta until accuracy saturates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from .core import ObjectivePoint, as_matrix, evaluate
from .errors import InstanceTooLargeError, ShapeError, ValidationError
from .optimizer import cheapest_assignment

DEFAULT_ENUMERATION_CAP = 10_000_000

_CHUNK = 1 << 18


@dataclass(frozen=True)
class ReferenceFront:
    """Non-dominated true-objective points, sorted by ascending cost."""

    points: list[ObjectivePoint]
    provenance: str

    def __post_init__(self):
        if not self.points:
            raise ValidationError("a reference front cannot be empty")

    def min_cost(self) -> ObjectivePoint:
        return self.points[0]

    def max_accuracy(self) -> ObjectivePoint:
        return self.points[-1]

    def as_array(self) -> np.ndarray:
        return np.array([[p.cost, p.accuracy] for p in self.points])


def _check_instance(C, A):
    Cv = as_matrix(C)
    Av = as_matrix(A)
    if Cv.shape != Av.shape:
        raise ShapeError(f"cost shape {Cv.shape} != label shape {Av.shape}")
    if Cv.shape[0] < 1 or Cv.shape[1] < 1:
        raise ValidationError("need at least one query and one LLM")
    return np.ascontiguousarray(Cv), np.ascontiguousarray(Av)


@njit(cache=True)
def _enumerate_chunk_nb(C, A, lo, hi, costs, accs):
    n, m = C.shape
    for r in range(lo, hi):
        rem = r
        cost = 0.0
        acc = 0.0
        for i in range(n):
            k = rem % m
            rem //= m
            cost += C[i, k]
            acc += A[i, k]
        costs[r - lo] = cost
        accs[r - lo] = acc


def _enumerate_chunk_np(C, A, lo, hi, costs, accs):
    n, m = C.shape
    ranks = np.arange(lo, hi, dtype=np.int64)
    costs[:] = 0.0
    accs[:] = 0.0
    for i in range(n):
        digit = ranks % m
        ranks //= m
        costs += C[i, digit]
        accs += A[i, digit]


_enumerate_chunk = pick(_enumerate_chunk_nb, _enumerate_chunk_np)


def _skyline(costs: np.ndarray, accs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Non-dominated (min cost, max acc) subset, deduplicated, cost-ascending."""
    order = np.lexsort((-accs, costs))
    sc = costs[order]
    sa = accs[order]
    keep = np.zeros(order.shape[0], dtype=bool)
    best = -np.inf
    for t in range(order.shape[0]):
        if sa[t] > best:
            keep[t] = True
            best = sa[t]
    return sc[keep], sa[keep]


def decode_assignment(rank: int, n: int, m: int) -> np.ndarray:
    """Assignment vector for enumeration rank (query 0 is the lowest digit)."""
    a = np.empty(n, dtype=np.int64)
    for i in range(n):
        a[i] = rank % m
        rank //= m
    return a


def brute_force_front(C, A, enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> ReferenceFront:
    """Exact front by enumerating all m**n assignments (cap-guarded)."""
    Cv, Av = _check_instance(C, A)
    n, m = Cv.shape
    total = m**n
    if total > enumeration_cap:
        raise InstanceTooLargeError(
            f"instance too large to enumerate: m**n = {total} exceeds cap {enumeration_cap}"
        )
    cand_costs: list[np.ndarray] = []
    cand_accs: list[np.ndarray] = []
    buf_c = np.empty(min(_CHUNK, total))
    buf_a = np.empty(min(_CHUNK, total))
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        _enumerate_chunk(Cv, Av, lo, hi, buf_c[: hi - lo], buf_a[: hi - lo])
        kc, ka = _skyline(buf_c[: hi - lo], buf_a[: hi - lo])
        cand_costs.append(kc)
        cand_accs.append(ka)
    fc, fa = _skyline(np.concatenate(cand_costs), np.concatenate(cand_accs))
    points = [ObjectivePoint(float(c), float(a) / n) for c, a in zip(fc, fa)]
    return ReferenceFront(points=points, provenance="brute_force")


def incremental_front(C, A) -> ReferenceFront:
    """Reference chain from the all-cheapest assignment.

    Repeatedly reassigns the incorrectly-answered query whose cheapest
    correct LLM has the smallest cost delta, recording each step, until no
    incorrect query has a correct option; returns the non-dominated set of
    the recorded chain.
    """
    Cv, Av = _check_instance(C, A)
    n, m = Cv.shape
    a = cheapest_assignment(Cv, Av)
    rows = np.arange(n)

    recorded = [evaluate(a, Cv, Av)]

    # per-query cheapest correct target and its delta; +inf when none applies
    correct_cost = np.where(Av == 1.0, Cv, np.inf)
    target = correct_cost.argmin(axis=1).astype(np.int64)
    best_cost = correct_cost[rows, target]
    delta = np.where(Av[rows, a] == 1.0, np.inf, best_cost - Cv[rows, a])

    while True:
        i = int(np.argmin(delta))
        if not np.isfinite(delta[i]):
            break
        a = a.copy()
        a[i] = target[i]
        delta[i] = np.inf  # now answered correctly, never revisited
        recorded.append(evaluate(a, Cv, Av))

    arr = np.array([[p.cost, p.accuracy] for p in recorded])
    fc, fa = _skyline(arr[:, 0], arr[:, 1])
    points = [ObjectivePoint(float(c), float(acc)) for c, acc in zip(fc, fa)]
    return ReferenceFront(points=points, provenance="incremental")
