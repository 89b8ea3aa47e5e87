"""Command-line pipeline: synth -> train -> predict -> optimize/nsga2 -> oracle -> evaluate.

Exit codes: 0 success, 2 validation error, 3 instance too large to
enumerate, 4 I/O error. Randomized commands require an explicit --seed.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from ._version import __version__
from . import data as dio
from .core import pareto_filter
from .errors import InstanceTooLargeError, ValidationError
from .metrics import delta_spread, igd
from .nsga2 import GAConfig, nsga2
from .optimizer import SearchConfig, optimize
from .oracle import ReferenceFront, brute_force_front, incremental_front
from .prediction import (
    PredictionMatrix,
    build_prediction_matrix,
    feature_table,
    load_model,
    save_model,
    train_ensemble,
)


def _cmd_synth(args) -> int:
    ds = dio.synth_instance(
        n=args.n,
        m=args.m,
        seed=args.seed,
        price_spread=args.price_spread,
        difficulty_correlation=args.difficulty_correlation,
    )
    dio.save_dataset_dir(ds, args.out)
    print(f"wrote synthetic instance (n={ds.n}, m={ds.m}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    ds = dio.load_dataset_dir(args.data)
    spec = dio.SplitSpec(train_fraction=args.train_frac, val_fraction=args.val_frac, seed=args.seed)
    train_idx, val_idx, _test_idx = dio.split_dataset(ds, spec)
    X = feature_table(ds.queries)
    Y = ds.labels.values
    model = train_ensemble(
        train=(X[train_idx], Y[train_idx]),
        val=(X[val_idx], Y[val_idx]),
        u=args.u,
        alpha=args.alpha,
        seed=args.seed,
    )
    save_model(model, args.model_out)
    print(
        f"trained ensemble: u={args.u}, alpha={args.alpha}, "
        f"train={len(train_idx)}, val={len(val_idx)}; saved to {args.model_out}"
    )
    return 0


def _cmd_predict(args) -> int:
    ds = dio.load_dataset_dir(args.data)
    model = load_model(args.model)
    matrix = build_prediction_matrix(model, ds.queries)
    dio.save_predictions(matrix.values, args.out)
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} prediction matrix to {args.out}")
    return 0


def _load_problem(args):
    ds = dio.load_dataset_dir(args.data)
    P = PredictionMatrix(dio.load_predictions(args.predictions, ds.n, ds.m))
    return ds, P, ds.cost_matrix()


def _cmd_optimize(args) -> int:
    ds, P, C = _load_problem(args)
    config = SearchConfig(grid_n=args.gn, max_iterations=args.max_iters, seed=args.seed)
    t0 = time.perf_counter()
    archive = optimize(P, C, config)
    elapsed = time.perf_counter() - t0
    meta = {
        "algorithm": "destruct_reconstruct",
        "grid_n": args.gn,
        "max_iterations": args.max_iters,
        "seed": args.seed,
    }
    dio.export_archive(archive, ds, args.out, metadata=meta)
    print(f"archive of {len(archive)} solutions written to {args.out} ({elapsed:.2f}s)")
    return 0


def _cmd_nsga2(args) -> int:
    ds, P, C = _load_problem(args)
    config = GAConfig(
        population_size=args.pop,
        generations=args.gens,
        seed=args.seed,
        inject_extremes=not args.no_inject_extremes,
    )
    t0 = time.perf_counter()
    archive = nsga2(P, C, config)
    elapsed = time.perf_counter() - t0
    meta = {
        "algorithm": "nsga2",
        "population_size": args.pop,
        "generations": args.gens,
        "seed": args.seed,
        "inject_extremes": config.inject_extremes,
    }
    dio.export_archive(archive, ds, args.out, metadata=meta)
    print(f"archive of {len(archive)} solutions written to {args.out} ({elapsed:.2f}s)")
    return 0


def _cmd_oracle(args) -> int:
    ds = dio.load_dataset_dir(args.data)
    C = ds.cost_matrix()
    if args.mode == "brute":
        front = brute_force_front(C, ds.labels, enumeration_cap=args.cap)
    else:
        front = incremental_front(C, ds.labels)
    dio.export_front(front, args.out, metadata={"mode": args.mode})
    print(f"reference front of {len(front.points)} points written to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    t0 = time.perf_counter()
    solutions, doc = dio.load_archive(args.archive)
    front = dio.load_front(args.reference)
    # prefer true objectives when the archive carries them
    points = [
        (entry["cost"], entry.get("true_accuracy", entry["predicted_accuracy"]))
        for entry in doc["solutions"]
    ]
    obtained = np.array(points).reshape(len(points), 2)
    filtered = pareto_filter(solutions)
    score = igd(obtained, front)
    if obtained.shape[0] >= 2:
        spread = f"{delta_spread(obtained, front):.6f}"
    else:
        spread = "NA (single solution)"
    elapsed = time.perf_counter() - t0
    lo = obtained[np.argmin(obtained[:, 0])]
    hi = obtained[np.argmax(obtained[:, 1])]
    print(f"archive: {len(solutions)} solutions ({len(filtered)} non-dominated)")
    print(f"igd: {score:.6f}")
    print(f"delta: {spread}")
    print(f"min-cost point: cost={float(lo[0])!r} accuracy={float(lo[1])!r}")
    print(f"max-accuracy point: cost={float(hi[0])!r} accuracy={float(hi[1])!r}")
    print(f"reference extremes: {front.min_cost()} .. {front.max_accuracy()}")
    print(f"wall time: {elapsed:.3f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llmroute",
        description="Assign query batches to priced LLMs, trading cost against accuracy.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset directory")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--price-spread", type=float, default=2.0)
    p.add_argument("--difficulty-correlation", type=float, default=0.8)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train the bootstrap ensemble predictor")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--train-frac", type=float, default=0.01)
    p.add_argument("--val-frac", type=float, default=0.01)
    p.add_argument("--u", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--model-out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="emit the robust prediction matrix")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("optimize", help="run the destruct/reconstruct search")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--predictions", required=True, metavar="FILE")
    p.add_argument("--gn", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("nsga2", help="run the NSGA-II baseline")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--predictions", required=True, metavar="FILE")
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--gens", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-inject-extremes", action="store_true")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_nsga2)

    p = sub.add_parser("oracle", help="compute a ground-truth reference front")
    p.add_argument("--data", required=True, metavar="DIR")
    p.add_argument("--mode", choices=["brute", "incremental"], required=True)
    p.add_argument("--cap", type=int, default=10_000_000)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("evaluate", help="score an archive against a reference front")
    p.add_argument("--archive", required=True, metavar="FILE")
    p.add_argument("--reference", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
