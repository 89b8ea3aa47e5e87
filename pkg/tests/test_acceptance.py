"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
report (including the timing comparison) as it executes.
"""

import json
import math
import time

import numpy as np
import pytest

from llmroute import (
    CostMatrix,
    GAConfig,
    LabelMatrix,
    ObjectivePoint,
    PredictionMatrix,
    SearchConfig,
    aggregate,
    brute_force_front,
    delta_spread,
    destruct,
    dominates,
    evaluate,
    igd,
    incremental_front,
    init_extremes,
    make_solution,
    nsga2,
    optimize,
    prediction_only_assignment,
    reconstruct,
)
from llmroute.data import SplitSpec, split_dataset, synth_instance
from llmroute.forest import ForestConfig
from llmroute.oracle import ReferenceFront
from llmroute.optimizer import SWAP, _check_pair, _reconstruct_steps
from llmroute.prediction import build_prediction_matrix, train_ensemble
from llmroute.cli import main as cli_main
from conftest import random_predictions, single_move_improves
from test_prediction import const_model
from llmroute.prediction import predict_robust


def small_instance(seed):
    """Criterion-1 instance family: n in [2,8], m in [2,3], random costs/labels."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    m = int(rng.integers(2, 4))
    C = CostMatrix(rng.uniform(0.1, 10.0, (n, m)))
    A = LabelMatrix(rng.integers(0, 2, (n, m)).astype(np.float64))
    return C, A


def enumerate_objectives(C: np.ndarray, A: np.ndarray):
    """Independent oracle: objectives of every assignment, accumulated in
    ascending query index (matching the library's documented sum order)."""
    n, m = C.shape
    total = m**n
    ranks = np.arange(total, dtype=np.int64)
    costs = np.zeros(total)
    accs = np.zeros(total)
    rem = ranks
    for i in range(n):
        digit = rem % m
        rem = rem // m
        costs = costs + C[i, digit]
        accs = accs + A[i, digit]
    return costs, accs / n


def warm_kernels():
    ds = synth_instance(6, 2, seed=991)
    P = PredictionMatrix(ds.labels.values)
    optimize(P, ds.cost_matrix(), SearchConfig(grid_n=3, max_iterations=3))
    brute_force_front(ds.cost_matrix(), ds.labels)
    incremental_front(ds.cost_matrix(), ds.labels)


@pytest.fixture(scope="module")
def scaled_runs():
    """Criterion 7/9 data: 20 synthetic instances (n=200, m=5, seeds 0..19),
    one shared prediction matrix per instance, both optimizers at the
    200-iteration / 200-generation budget."""
    warm_kernels()
    t_start = time.perf_counter()
    runs = []
    for seed in range(20):
        ds = synth_instance(200, 5, seed=seed)
        C = ds.cost_matrix()
        train_idx, val_idx, _ = split_dataset(ds, SplitSpec(0.2, 0.2, seed=seed))
        X = ds.feature_array()
        Y = ds.labels.values
        model = train_ensemble(
            (X[train_idx], Y[train_idx]),
            (X[val_idx], Y[val_idx]),
            u=25,
            alpha=0.5,
            seed=seed,
        )
        P = build_prediction_matrix(model, ds.queries)
        reference = incremental_front(C, ds.labels)

        t0 = time.perf_counter()
        archive_opt = optimize(P, C, SearchConfig(grid_n=50, max_iterations=200))
        t_opt = time.perf_counter() - t0

        t0 = time.perf_counter()
        archive_ga = nsga2(P, C, GAConfig(population_size=100, generations=200, seed=seed))
        t_ga = time.perf_counter() - t0

        def true_points(archive):
            return [
                (s.objectives.cost, evaluate(s.assignment, C, ds.labels).accuracy)
                for s in archive
            ]

        runs.append(
            {
                "seed": seed,
                "igd_opt": igd(true_points(archive_opt), reference),
                "igd_ga": igd(true_points(archive_ga), reference),
                "t_opt": t_opt,
                "t_ga": t_ga,
                "best_pred_acc_opt": archive_opt.max_accuracy().objectives.accuracy,
                "threshold_pred_acc": prediction_only_assignment(P, C).objectives.accuracy,
            }
        )
    return {"runs": runs, "elapsed": time.perf_counter() - t_start}


def test_criterion_1_oracle_equivalence():
    warm_kernels()
    t0 = time.perf_counter()
    for seed in range(200):
        C, A = small_instance(seed)
        P = PredictionMatrix(A.values)
        archive = optimize(P, C)
        front = brute_force_front(C, A)
        for s in archive:
            assert not any(
                dominates(p, s.objectives) for p in front.points
            ), f"seed {seed}: archived {s.objectives} is dominated"
        lo = archive.min_cost().objectives
        hi = archive.max_accuracy().objectives
        assert (lo.cost, lo.accuracy) == (front.min_cost().cost, front.min_cost().accuracy)
        assert (hi.cost, hi.accuracy) == (
            front.max_accuracy().cost,
            front.max_accuracy().accuracy,
        )
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"criterion 1 took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 1 oracle equivalence (200 instances, {elapsed:.1f}s): PASS")


def test_criterion_2_extreme_solutions_undominated():
    violations = 0
    for seed in range(200):
        C, A = small_instance(seed)
        P = PredictionMatrix(A.values)
        s_h, s_c = init_extremes(P, C)
        costs, accs = enumerate_objectives(C.values, P.values)
        for s in (s_c, s_h):
            o = s.objectives
            dominated = (
                ((costs <= o.cost) & (accs > o.accuracy))
                | ((costs < o.cost) & (accs >= o.accuracy))
            ).any()
            if dominated:
                violations += 1
    assert violations == 0
    print("ACCEPTANCE 2 extreme solutions undominated (200 instances): PASS")


def test_criterion_3_ratio_implication_on_archives():
    violations = 0
    for seed in range(50):
        C, A = small_instance(seed)
        P = random_predictions(10_000 + seed, C.shape)
        archive = optimize(P, C)
        members = archive.members
        for s1 in members:
            for s2 in members:
                c1, c2 = s1.objectives.cost, s2.objectives.cost
                if c1 <= 0 or c2 <= 0:
                    continue
                if s1.objectives.accuracy / c1 <= s2.objectives.accuracy / c2:
                    if dominates(s1.objectives, s2.objectives):
                        violations += 1
    assert violations == 0
    print("ACCEPTANCE 3 ratio implication on archived pairs (50 runs): PASS")


def test_criterion_4_destruction_reconstruction_contracts():
    rng = np.random.default_rng(424242)
    destruct_checked = reconstruct_checked = 0

    while destruct_checked < 1000:
        C, A = small_instance(int(rng.integers(0, 2**31)))
        n, m = C.shape
        P = random_predictions(int(rng.integers(0, 2**31)), (n, m))
        a = rng.integers(0, m, n)
        s = make_solution(a, C, P)
        direction = "cost" if destruct_checked % 2 == 0 else "accuracy"
        gap = float(rng.uniform(1e-3, 8.0 if direction == "cost" else 0.8))
        out = destruct(s, gap, direction, P, C)
        if direction == "cost":
            achieved = s.objectives.cost - out.objectives.cost
            exhausted = bool(
                (C.values[np.arange(n), out.assignment] == C.values.min(axis=1)).all()
            )
        else:
            achieved = out.objectives.accuracy - s.objectives.accuracy
            exhausted = bool(
                (P.values[np.arange(n), out.assignment] == P.values.max(axis=1)).all()
            )
        assert achieved >= gap - 1e-9 * max(1.0, gap) or exhausted, (
            f"destruct neither met gap nor exhausted (dir={direction})"
        )
        destruct_checked += 1

    while reconstruct_checked < 1000:
        C, A = small_instance(int(rng.integers(0, 2**31)))
        n, m = C.shape
        P = random_predictions(int(rng.integers(0, 2**31)), (n, m))
        s = make_solution(rng.integers(0, m, n), C, P)
        Pv, Cv = _check_pair(P, C)
        out, phases = _reconstruct_steps(s, Pv, Cv)
        for sol in out:
            assert not single_move_improves(sol.assignment, Pv, Cv)
        for prev, cur, phase in zip(out, out[1:], phases[1:]):
            if phase == SWAP:
                assert cur.objectives.accuracy > prev.objectives.accuracy
        reconstruct_checked += 1

    assert destruct_checked == 1000 and reconstruct_checked == 1000
    print("ACCEPTANCE 4 destruction/reconstruction contracts (1000 calls each): PASS")


def test_criterion_5_prediction_equations():
    t0 = time.perf_counter()

    # weighted-mean aggregation
    assert aggregate([0.2, 0.8], [1, 1]) == 0.5
    assert aggregate([0.2, 0.8], [1, 0]) == 0.2
    assert aggregate([0.0, 1.0], [1, 3]) == 0.75

    # robustness shift: alpha=0 identity (exact)
    model = const_model([[0.1, 0.9], [0.5, 0.3]], [0.25, 0.75], alpha=0.0)
    out = predict_robust(model, np.zeros(2))
    assert out[0] == aggregate([0.1, 0.5], [0.25, 0.75])
    assert out[1] == aggregate([0.9, 0.3], [0.25, 0.75])

    # zero-variance identity (exact)
    wmean = aggregate([0.6, 0.6], [0.3, 0.7])
    for alpha in (-1.0, 0.0, 1.0):
        model = const_model([[0.6], [0.6]], [0.3, 0.7], alpha)
        assert predict_robust(model, np.zeros(2)).tolist() == [wmean]

    # monotone in alpha across the sweep grid, on interior points
    grid = [-1.0, -0.5, 0.0, 0.5, 1.0]
    outputs = []
    for alpha in grid:
        model = const_model([[0.45], [0.55], [0.5]], [1.0, 1.0, 1.0], alpha)
        outputs.append(float(predict_robust(model, np.zeros(2))[0]))
    assert all(0.0 < x < 1.0 for x in outputs)
    assert all(a <= b for a, b in zip(outputs, outputs[1:]))

    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(f"ACCEPTANCE 5 prediction equations ({elapsed:.2f}s): PASS")


def test_criterion_6_metric_identities():
    ref = ReferenceFront(
        points=[ObjectivePoint(0.0, 0.0), ObjectivePoint(0.5, 0.5), ObjectivePoint(1.0, 1.0)],
        provenance="brute_force",
    )
    assert igd(ref, ref) == 0.0
    assert delta_spread(ref, ref) == 0.0

    corner_ref = ReferenceFront(
        points=[ObjectivePoint(0.0, 0.0), ObjectivePoint(1.0, 1.0)], provenance="brute_force"
    )
    assert abs(igd([(0.0, 0.0)], corner_ref) - math.sqrt(2.0) / 2.0) <= 1e-9
    assert abs(delta_spread([(0.0, 0.0), (0.1, 0.1), (1.0, 1.0)], corner_ref) - 0.8) <= 1e-9
    print("ACCEPTANCE 6 metric identities: PASS")


def test_criterion_7_scaled_comparison(scaled_runs):
    runs = scaled_runs["runs"]
    med_igd_opt = float(np.median([r["igd_opt"] for r in runs]))
    med_igd_ga = float(np.median([r["igd_ga"] for r in runs]))
    med_t_opt = float(np.median([r["t_opt"] for r in runs]))
    med_t_ga = float(np.median([r["t_ga"] for r in runs]))
    ratio = med_t_ga / med_t_opt
    print(
        f"\nACCEPTANCE 7 medians over 20 instances: "
        f"igd {med_igd_opt:.4f} (heuristic) vs {med_igd_ga:.4f} (nsga2); "
        f"time {med_t_opt:.3f}s vs {med_t_ga:.3f}s (speed ratio {ratio:.1f}x, reported not asserted)"
    )
    assert med_igd_opt <= med_igd_ga
    assert med_t_opt < med_t_ga
    assert scaled_runs["elapsed"] < 600.0, f"criterion 7 took {scaled_runs['elapsed']:.0f}s"
    print("ACCEPTANCE 7 scaled comparison vs NSGA-II: PASS")


def test_criterion_8_pipeline_determinism(tmp_path):
    archives = []
    for run in ("r1", "r2"):
        base = tmp_path / run
        base.mkdir()
        data = base / "data"
        model = base / "model.npz"
        preds = base / "preds.csv"
        front = base / "front.json"
        archive = base / "archive.json"
        assert cli_main(["synth", "--n", "80", "--m", "3", "--seed", "21", "--out", str(data)]) == 0
        assert cli_main([
            "train", "--data", str(data), "--train-frac", "0.1", "--val-frac", "0.1",
            "--u", "5", "--alpha", "0.5", "--seed", "13", "--model-out", str(model),
        ]) == 0
        assert cli_main(["predict", "--data", str(data), "--model", str(model), "--out", str(preds)]) == 0
        assert cli_main([
            "optimize", "--data", str(data), "--predictions", str(preds),
            "--gn", "25", "--max-iters", "100", "--out", str(archive),
        ]) == 0
        assert cli_main(["oracle", "--data", str(data), "--mode", "incremental", "--out", str(front)]) == 0
        assert cli_main(["evaluate", "--archive", str(archive), "--reference", str(front)]) == 0
        archives.append(archive.read_bytes())
    assert archives[0] == archives[1], "archive files must be byte-identical across runs"
    json.loads(archives[0])  # structurally valid
    print("ACCEPTANCE 8 end-to-end pipeline determinism: PASS")


def test_criterion_9_prediction_only_ablation(scaled_runs):
    for r in scaled_runs["runs"]:
        assert r["threshold_pred_acc"] <= r["best_pred_acc_opt"] + 1e-12, (
            f"seed {r['seed']}: threshold assignment beat the full search"
        )
    print("ACCEPTANCE 9 prediction-only ablation bounded by full search: PASS")
