import numpy as np
import pytest

from llmroute import (
    CostMatrix,
    LabelMatrix,
    PredictionMatrix,
    dominates,
)


def random_instance(seed, n_range=(2, 9), m_range=(2, 4)):
    """Small random instance: continuous costs, binary labels."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(*n_range))
    m = int(rng.integers(*m_range))
    C = rng.uniform(0.1, 10.0, (n, m))
    A = rng.integers(0, 2, (n, m)).astype(np.float64)
    return CostMatrix(C), LabelMatrix(A)


def random_predictions(seed, shape):
    rng = np.random.default_rng(seed)
    return PredictionMatrix(rng.uniform(0.0, 1.0, shape))


def single_move_improves(assignment, P, C) -> bool:
    """Exhaustive check: does any single-query reassignment weakly improve
    both objectives with at least one strict improvement?"""
    n, m = P.shape
    for i in range(n):
        cur = assignment[i]
        for k in range(m):
            if k == cur:
                continue
            better_acc = P[i, k] >= P[i, cur]
            better_cost = C[i, k] <= C[i, cur]
            strict = P[i, k] > P[i, cur] or C[i, k] < C[i, cur]
            if better_acc and better_cost and strict:
                return True
    return False


def assert_archive_invariants(archive):
    members = archive.members
    costs = [s.objectives.cost for s in members]
    accs = [s.objectives.accuracy for s in members]
    assert costs == sorted(costs)
    for i in range(len(members) - 1):
        assert accs[i] < accs[i + 1], "accuracy must be strictly ascending"
    for i, a in enumerate(members):
        for j, b in enumerate(members):
            if i != j:
                assert not dominates(a.objectives, b.objectives)
    pairs = {(s.objectives.cost, s.objectives.accuracy) for s in members}
    assert len(pairs) == len(members), "objective pairs must be unique"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
