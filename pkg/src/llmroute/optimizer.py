"""Grid-paced destroy-and-repair search for the cost/accuracy Pareto archive.

Two extreme solutions seed the archive: the all-cheapest assignment and the
highest-predicted-accuracy assignment. Each iteration destructs the current
pair of working solutions by one grid step (toward lower cost, toward higher
accuracy), repairs them with strictly-improving moves and ratio-scored
paired swaps, and archives everything produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from .core import (
    Solution,
    SolutionArchive,
    as_matrix,
    evaluate,
    make_solution,
    picked_sum,
)
from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the heuristic search.

    ``seed`` is reserved for optional tie randomization, which is off by
    default; with it off the search is fully deterministic.
    """

    grid_n: int = 50
    max_iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.grid_n < 1:
            raise ValidationError(f"grid_n must be >= 1, got {self.grid_n}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class Move:
    """A single-query reassignment with its objective deltas and score."""

    query: int
    to_llm: int
    delta_cost: float
    delta_acc: float
    score: float


def _check_pair(P, C):
    Pv = as_matrix(P)
    Cv = as_matrix(C)
    if Pv.shape != Cv.shape:
        raise ShapeError(f"prediction shape {Pv.shape} != cost shape {Cv.shape}")
    if Pv.shape[0] < 1 or Pv.shape[1] < 1:
        raise ValidationError("need at least one query and one LLM")
    return np.ascontiguousarray(Pv), np.ascontiguousarray(Cv)


def cheapest_assignment(C: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Row-wise cheapest LLM; cost ties prefer higher accuracy, then lower index."""
    cmin = C.min(axis=1, keepdims=True)
    tie = C == cmin
    p_masked = np.where(tie, P, -np.inf)
    pbest = p_masked.max(axis=1, keepdims=True)
    return (tie & (p_masked == pbest)).argmax(axis=1).astype(np.int64)


def best_accuracy_assignment(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Row-wise highest-accuracy LLM; ties prefer cheaper, then lower index."""
    pmax = P.max(axis=1, keepdims=True)
    tie = P == pmax
    c_masked = np.where(tie, C, np.inf)
    cbest = c_masked.min(axis=1, keepdims=True)
    return (tie & (c_masked == cbest)).argmax(axis=1).astype(np.int64)


def init_extremes(P, C) -> tuple[Solution, Solution]:
    """The two guaranteed-Pareto extremes (s_h, s_c) under predicted objectives."""
    Pv, Cv = _check_pair(P, C)
    s_h = make_solution(best_accuracy_assignment(Pv, Cv), Cv, Pv)
    s_c = make_solution(cheapest_assignment(Cv, Pv), Cv, Pv)
    return s_h, s_c


def destruct(solution: Solution, gap: float, direction: str, P, C) -> Solution:
    """Sacrifice one objective by at least ``gap``, greediest reassignments first.

    direction="cost": repeatedly move the query with the largest cost saving
    to its cheapest LLM until the cumulative saving reaches ``gap`` or no
    saving move remains. direction="accuracy" is symmetric on predicted
    accuracy (``gap`` measured on the mean-accuracy objective).
    """
    if not gap > 0:
        raise ValidationError(f"gap must be positive, got {gap}")
    Pv, Cv = _check_pair(P, C)
    a = solution.assignment.copy()
    n = a.shape[0]
    rows = np.arange(n)

    if direction == "cost":
        target = Cv.argmin(axis=1).astype(np.int64)
        delta = Cv[rows, target] - Cv[rows, a]  # <= 0
        order = np.argsort(delta, kind="mergesort")
        gains = -delta[order]
        n_improving = int((delta < 0).sum())
        budget = gap
    elif direction == "accuracy":
        target = best_accuracy_assignment(Pv, Cv)
        delta = Pv[rows, target] - Pv[rows, a]  # >= 0
        order = np.argsort(-delta, kind="mergesort")
        gains = delta[order]
        n_improving = int((delta > 0).sum())
        budget = gap * n  # objective gap is on the mean; gains are raw deltas
    else:
        raise ValidationError(f"direction must be 'cost' or 'accuracy', got {direction!r}")

    if n_improving == 0:
        return make_solution(a, Cv, Pv)
    cum = np.cumsum(gains[:n_improving])
    hit = int(np.searchsorted(cum, budget, side="left"))
    k = min(hit + 1, n_improving)
    chosen = order[:k]
    a[chosen] = target[chosen]
    return make_solution(a, Cv, Pv)


def _move_tables(a, P, C):
    """Per-query best positive and best negative scored moves, vectorized.

    Positive moves buy accuracy with cost (score = gain per unit spent);
    negative moves give up accuracy to free cost (score = -loss per unit
    freed, so closest to zero is best). Ties prefer the cheaper target LLM,
    then the lower index.
    """
    n, m = P.shape
    rows = np.arange(n)
    pc = P[rows, a][:, None]
    cc = C[rows, a][:, None]
    dp = P - pc
    dc = C - cc

    with np.errstate(divide="ignore", invalid="ignore"):
        pos_scores = np.where((dp > 0) & (dc > 0), dp / dc, -np.inf)
        neg_scores = np.where((dp < 0) & (dc < 0), dp / (-dc), -np.inf)

    def best(scores):
        smax = scores.max(axis=1, keepdims=True)
        tie = scores == smax
        c_masked = np.where(tie, C, np.inf)
        cbest = c_masked.min(axis=1, keepdims=True)
        target = (tie & (c_masked == cbest)).argmax(axis=1).astype(np.int64)
        return smax[:, 0], target

    pos_score, pos_target = best(pos_scores)
    neg_score, neg_target = best(neg_scores)
    return pos_score, pos_target, neg_score, neg_target, dp


def score_moves(solution: Solution, P, C) -> tuple[dict[int, Move], dict[int, Move]]:
    """Each query's best positive and best negative move, where they exist."""
    Pv, Cv = _check_pair(P, C)
    a = solution.assignment
    pos_score, pos_target, neg_score, neg_target, dp = _move_tables(a, Pv, Cv)
    rows = np.arange(a.shape[0])
    dc_pos = Cv[rows, pos_target] - Cv[rows, a]
    dc_neg = Cv[rows, neg_target] - Cv[rows, a]

    positive, negative = {}, {}
    for i in range(a.shape[0]):
        if pos_score[i] > -np.inf:
            positive[i] = Move(
                query=i,
                to_llm=int(pos_target[i]),
                delta_cost=float(dc_pos[i]),
                delta_acc=float(dp[i, pos_target[i]]),
                score=float(pos_score[i]),
            )
        if neg_score[i] > -np.inf:
            negative[i] = Move(
                query=i,
                to_llm=int(neg_target[i]),
                delta_cost=float(dc_neg[i]),
                delta_acc=float(dp[i, neg_target[i]]),
                score=float(neg_score[i]),
            )
    return positive, negative


def _prepass(a: np.ndarray, P: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Apply every strictly-improving single-query move (free improvements).

    Moves touch only their own query, so the per-row lexicographic-best
    improving target is a fixed point after one simultaneous application.
    """
    n = a.shape[0]
    rows = np.arange(n)
    pc = P[rows, a][:, None]
    cc = C[rows, a][:, None]
    improving = (P >= pc) & (C <= cc) & ~((P == pc) & (C == cc))
    if not improving.any():
        return a
    p_masked = np.where(improving, P, -np.inf)
    pmax = p_masked.max(axis=1, keepdims=True)
    tie = improving & (p_masked == pmax)
    c_masked = np.where(tie, C, np.inf)
    cmin = c_masked.min(axis=1, keepdims=True)
    target = (tie & (c_masked == cmin)).argmax(axis=1).astype(np.int64)
    has = improving.any(axis=1)
    out = a.copy()
    out[has] = target[has]
    return out


@njit(cache=True)
def _move_tables_nb(a, P, C):
    n, m = P.shape
    pos_score = np.full(n, -np.inf)
    pos_target = np.full(n, -1, dtype=np.int64)
    neg_score = np.full(n, -np.inf)
    neg_target = np.full(n, -1, dtype=np.int64)

    for i in range(n):
        cur = a[i]
        pi = P[i, cur]
        ci = C[i, cur]
        for k in range(m):
            dp = P[i, k] - pi
            dc = C[i, k] - ci
            if dp > 0 and dc > 0:
                s = dp / dc
                if s > pos_score[i] or (
                    s == pos_score[i]
                    and (
                        C[i, k] < C[i, pos_target[i]]
                        or (C[i, k] == C[i, pos_target[i]] and k < pos_target[i])
                    )
                ):
                    pos_score[i] = s
                    pos_target[i] = k
            elif dp < 0 and dc < 0:
                s = dp / (-dc)
                if s > neg_score[i] or (
                    s == neg_score[i]
                    and (
                        C[i, k] < C[i, neg_target[i]]
                        or (C[i, k] == C[i, neg_target[i]] and k < neg_target[i])
                    )
                ):
                    neg_score[i] = s
                    neg_target[i] = k
    return pos_score, pos_target, neg_score, neg_target


@njit(cache=True)
def _find_step_nb(a, P, C, dominance_phase):
    n, m = P.shape
    pos_score, pos_target, neg_score, neg_target = _move_tables_nb(a, P, C)

    i1 = -1
    best = -np.inf
    for i in range(n):
        if pos_score[i] > best:
            best = pos_score[i]
            i1 = i
    if i1 < 0:
        return -1, -1, -1, -1
    t1 = pos_target[i1]
    dacc1 = P[i1, t1] - P[i1, a[i1]]
    dcost1 = C[i1, t1] - C[i1, a[i1]]

    acc_base = 0.0
    cost_base = 0.0
    for i in range(n):
        acc_base += P[i, a[i]]
        cost_base += C[i, a[i]]

    tried = np.zeros(n, dtype=np.bool_)
    while True:
        i2 = -1
        best2 = -np.inf
        for i in range(n):
            if i == i1 or tried[i]:
                continue
            if neg_score[i] > best2:
                best2 = neg_score[i]
                i2 = i
        if i2 < 0 or best2 == -np.inf:
            return -1, -1, -1, -1
        t2 = neg_target[i2]
        dacc2 = P[i2, t2] - P[i2, a[i2]]
        dcost2 = C[i2, t2] - C[i2, a[i2]]

        ok = False
        if dominance_phase:
            # candidate must dominate on the move deltas
            ok = (dacc1 > -dacc2 and dcost1 <= -dcost2) or (
                dacc1 >= -dacc2 and dcost1 < -dcost2
            )
        else:
            if not (pos_score[i1] > -best2):  # |score(i1)| > |score(i2)| failed
                return -1, -1, -1, -1
            ok = dacc1 > -dacc2  # strict accuracy increase on the deltas

        if ok:
            # confirm against fresh objective sums before accepting
            new_acc = 0.0
            new_cost = 0.0
            for i in range(n):
                k = a[i]
                if i == i1:
                    k = t1
                elif i == i2:
                    k = t2
                new_acc += P[i, k]
                new_cost += C[i, k]
            if dominance_phase:
                if (new_cost <= cost_base and new_acc > acc_base) or (
                    new_cost < cost_base and new_acc >= acc_base
                ):
                    return i1, t1, i2, t2
            else:
                if new_acc > acc_base:
                    return i1, t1, i2, t2
        tried[i2] = True


def _find_step_np(a, P, C, dominance_phase):
    n = a.shape[0]
    pos_score, pos_target, neg_score, neg_target, dp = _move_tables(a, P, C)

    if not (pos_score > -np.inf).any():
        return -1, -1, -1, -1
    i1 = int(np.argmax(pos_score))
    t1 = int(pos_target[i1])
    dacc1 = float(dp[i1, t1])
    dcost1 = float(C[i1, t1] - C[i1, a[i1]])
    acc_base = picked_sum(P, a)
    cost_base = picked_sum(C, a)

    tried = np.zeros(n, dtype=bool)
    tried[i1] = True
    while True:
        masked = np.where(tried, -np.inf, neg_score)
        i2 = int(np.argmax(masked))
        best2 = masked[i2]
        if best2 == -np.inf:
            return -1, -1, -1, -1
        t2 = int(neg_target[i2])
        dacc2 = float(dp[i2, t2])
        dcost2 = float(C[i2, t2] - C[i2, a[i2]])

        if dominance_phase:
            ok = (dacc1 > -dacc2 and dcost1 <= -dcost2) or (
                dacc1 >= -dacc2 and dcost1 < -dcost2
            )
        else:
            if not (pos_score[i1] > -best2):
                return -1, -1, -1, -1
            ok = dacc1 > -dacc2

        if ok:
            trial = a.copy()
            trial[i1] = t1
            trial[i2] = t2
            new_acc = picked_sum(P, trial)
            new_cost = picked_sum(C, trial)
            if dominance_phase:
                if (new_cost <= cost_base and new_acc > acc_base) or (
                    new_cost < cost_base and new_acc >= acc_base
                ):
                    return i1, t1, i2, t2
            else:
                if new_acc > acc_base:
                    return i1, t1, i2, t2
        tried[i2] = True


_find_step = pick(_find_step_nb, _find_step_np)

PREPASS, SWAP, EXCHANGE = "prepass", "swap", "exchange"


def _reconstruct_steps(solution: Solution, Pv, Cv) -> tuple[list[Solution], list[str]]:
    """Repair a solution, tagging each produced state with its phase.

    Phase order per state: ratio-scored swaps that strictly raise predicted
    accuracy, then paired exchanges whose result dominates the current
    state (the replace case of the repair loop). Every accepted step
    strictly increases (accuracy, -cost) lexicographically, so the loop
    terminates.
    """
    a = _prepass(solution.assignment.copy(), Pv, Cv)
    out = [make_solution(a, Cv, Pv)]
    phases = [PREPASS]
    a = out[0].assignment.copy()
    while True:
        i1, k1, i2, k2 = _find_step(a, Pv, Cv, False)
        if i1 >= 0:
            phase = SWAP
        else:
            i1, k1, i2, k2 = _find_step(a, Pv, Cv, True)
            if i1 < 0:
                break
            phase = EXCHANGE
        a[i1] = k1
        a[i2] = k2
        out.append(make_solution(a, Cv, Pv))
        phases.append(phase)
    return out, phases


def reconstruct(solution: Solution, P, C) -> list[Solution]:
    """Repair a destructed solution; return the pre-pass result plus every
    accepted paired move, in production order."""
    Pv, Cv = _check_pair(P, C)
    out, _phases = _reconstruct_steps(solution, Pv, Cv)
    return out


def optimize(P, C, config: SearchConfig | None = None) -> SolutionArchive:
    """Build the non-dominated archive by iterated destruction/reconstruction."""
    config = config or SearchConfig()
    Pv, Cv = _check_pair(P, C)
    s_h, s_c = init_extremes(Pv, Cv)

    archive = SolutionArchive()
    archive.add(s_c)
    archive.add(s_h)

    d_cost = abs(s_h.objectives.cost - s_c.objectives.cost) / config.grid_n
    d_acc = abs(s_h.objectives.accuracy - s_c.objectives.accuracy) / config.grid_n
    if d_cost <= 0.0 and d_acc <= 0.0:
        return archive

    s1, s2 = s_h, s_c
    for _ in range(config.max_iterations):
        cost_done = acc_done = True
        if d_cost > 0.0:
            destructed = destruct(s1, d_cost, "cost", Pv, Cv)
            cost_done = bool(np.array_equal(destructed.assignment, s1.assignment))
            produced = reconstruct(destructed, Pv, Cv)
            for sol in produced:
                archive.add(sol)
            s1 = produced[-1]
        if d_acc > 0.0:
            destructed = destruct(s2, d_acc, "accuracy", Pv, Cv)
            acc_done = bool(np.array_equal(destructed.assignment, s2.assignment))
            produced = reconstruct(destructed, Pv, Cv)
            for sol in produced:
                archive.add(sol)
            s2 = produced[-1]
        if cost_done and acc_done:
            break
    return archive


def prediction_only_assignment(P, C, threshold: float = 0.5) -> Solution:
    """Ablation baseline: cheapest LLM predicted correct (p >= threshold);
    queries with no such LLM fall back to the overall cheapest."""
    Pv, Cv = _check_pair(P, C)
    capable = Pv >= threshold
    c_masked = np.where(capable, Cv, np.inf)
    cbest = c_masked.min(axis=1, keepdims=True)
    pick_masked = capable & (c_masked == cbest)
    a = pick_masked.argmax(axis=1).astype(np.int64)
    none_capable = ~capable.any(axis=1)
    if none_capable.any():
        fallback = cheapest_assignment(Cv, Pv)
        a[none_capable] = fallback[none_capable]
    return make_solution(a, Cv, Pv)
