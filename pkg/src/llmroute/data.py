"""Dataset ingestion, splitting, synthetic instances, and result files.

On-disk layout is a directory of delimiter-separated tables with header
rows: queries.csv (query_id, token_count, text), labels.csv (query_id,
llm_id, correct), prices.csv (llm_id, name, price_per_token), and optional
features.csv (query_id, f0..f{d-1}) and costs.csv (query_id, llm_id, cost)
overriding the token*price model per cell. Archives and reference fronts
are versioned JSON documents; floats are serialized with repr so exports
round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__ as _version
from .core import (
    CostMatrix,
    LabelMatrix,
    LLMCandidate,
    ObjectivePoint,
    Query,
    Solution,
    SolutionArchive,
    compute_cost_matrix,
    evaluate,
)
from .errors import InvalidSplitError, ShapeError, ValidationError
from .oracle import ReferenceFront

ARCHIVE_FORMAT_VERSION = 1
FRONT_FORMAT_VERSION = 1

QUERIES_FILE = "queries.csv"
LABELS_FILE = "labels.csv"
PRICES_FILE = "prices.csv"
FEATURES_FILE = "features.csv"
COSTS_FILE = "costs.csv"


@dataclass
class Dataset:
    """Queries, priced candidates, ground-truth labels, optional extras."""

    queries: list[Query]
    llms: list[LLMCandidate]
    labels: LabelMatrix
    cost_overrides: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        n, m = len(self.queries), len(self.llms)
        if self.labels.shape != (n, m):
            raise ShapeError(
                f"label matrix shape {self.labels.shape} != ({n} queries, {m} llms)"
            )
        if [q.id for q in self.queries] != list(range(n)):
            raise ValidationError("query ids must be dense and unique: 0..n-1 in order")
        if [l.id for l in self.llms] != list(range(m)):
            raise ValidationError("llm ids must be dense and unique: 0..m-1 in order")
        dims = {q.features.shape[0] for q in self.queries if q.features is not None}
        if len(dims) > 1:
            raise ValidationError(f"inconsistent feature dimensions: {sorted(dims)}")
        for (i, k), v in self.cost_overrides.items():
            if not (0 <= i < n and 0 <= k < m):
                raise ValidationError(f"cost override ({i}, {k}) out of bounds")
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError(f"cost override ({i}, {k}) must be finite and >= 0")

    @property
    def n(self) -> int:
        return len(self.queries)

    @property
    def m(self) -> int:
        return len(self.llms)

    def cost_matrix(self) -> CostMatrix:
        base = compute_cost_matrix(self.queries, self.llms)
        if not self.cost_overrides:
            return base
        values = base.values.copy()
        for (i, k), v in self.cost_overrides.items():
            values[i, k] = v
        return CostMatrix(values)

    def feature_array(self) -> np.ndarray | None:
        if all(q.features is None for q in self.queries):
            return None
        if any(q.features is None for q in self.queries):
            raise ValidationError("either all queries carry features or none do")
        return np.stack([q.features for q in self.queries])


@dataclass(frozen=True)
class SplitSpec:
    """Fractional train/val split over query indices; the rest is test."""

    train_fraction: float = 0.01
    val_fraction: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name, f in (("train_fraction", self.train_fraction), ("val_fraction", self.val_fraction)):
            if not (0.0 < f < 1.0):
                raise InvalidSplitError(f"{name} must lie in (0, 1), got {f}")
        if self.train_fraction + self.val_fraction >= 1.0:
            raise InvalidSplitError("train_fraction + val_fraction must be < 1")


def split_dataset(ds: Dataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint, exhaustive (train, val, test) index sets; deterministic per seed."""
    n = ds.n
    n_train = math.ceil(spec.train_fraction * n)
    n_val = math.ceil(spec.val_fraction * n)
    if n_train < 1 or n_val < 1 or n_train + n_val > n:
        raise InvalidSplitError(
            f"split sizes (train={n_train}, val={n_val}) are infeasible for n={n}"
        )
    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFFFFFF)
    perm = rng.permutation(n)
    train = np.sort(perm[:n_train])
    val = np.sort(perm[n_train : n_train + n_val])
    test = np.sort(perm[n_train + n_val :])
    return train, val, test


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def synth_instance(
    n: int,
    m: int,
    seed: int,
    price_spread: float = 2.0,
    difficulty_correlation: float = 0.8,
) -> Dataset:
    """Synthetic instance with learnable structure.

    Prices are log-uniform across ``price_spread`` decades. Each LLM has a
    latent skill correlated with its log-price by ``difficulty_correlation``
    and each query a latent difficulty; labels are Bernoulli in
    sigmoid(skill - difficulty). Queries carry 2-d features (noisy
    difficulty, pure noise) so the success predictor has signal.
    """
    if n < 1 or m < 1:
        raise ValidationError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if not price_spread > 0:
        raise ValidationError(f"price_spread must be positive, got {price_spread}")
    if not (-1.0 <= difficulty_correlation <= 1.0):
        raise ValidationError("difficulty_correlation must lie in [-1, 1]")

    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    tokens = rng.integers(10, 501, size=n)
    exponents = rng.uniform(0.0, price_spread, size=m)
    prices = np.power(10.0, exponents - 5.0)  # anchored near real per-token prices

    raw_skill = rng.standard_normal(m)
    log_p = np.log10(prices)
    std = log_p.std()
    z_price = (log_p - log_p.mean()) / std if std > 0 else np.zeros(m)
    rho = difficulty_correlation
    skill = 2.0 * (rho * z_price + math.sqrt(1.0 - rho * rho) * raw_skill)

    difficulty = rng.standard_normal(n)
    prob = _sigmoid(skill[None, :] - difficulty[:, None])
    labels = (rng.random((n, m)) < prob).astype(np.float64)

    feat_noise = rng.standard_normal((n, 2))
    features = np.column_stack([difficulty + 0.3 * feat_noise[:, 0], feat_noise[:, 1]])

    queries = [
        Query(id=i, token_count=int(tokens[i]), text=None, features=features[i])
        for i in range(n)
    ]
    llms = [
        LLMCandidate(id=k, name=f"llm{k}", price_per_token=float(prices[k])) for k in range(m)
    ]
    return Dataset(queries=queries, llms=llms, labels=LabelMatrix(labels))


# ---------------------------------------------------------------------------
# CSV round-trip


def _read_rows(path: Path, expected: list[str]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in expected if c not in header]
        if missing:
            raise ValidationError(f"{path}: missing columns {missing} (found {header})")
        return list(reader)


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, where: str) -> float:
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ValidationError(f"{where}: value must be finite, got {raw!r}")
    return v


def load_dataset(queries_path, labels_path, prices_path, features_path=None, costs_path=None) -> Dataset:
    """Load and validate a dataset from its table files."""
    queries_path, labels_path, prices_path = Path(queries_path), Path(labels_path), Path(prices_path)
    for p in (queries_path, labels_path, prices_path):
        if not p.exists():
            raise FileNotFoundError(f"dataset file not found: {p}")

    feature_rows: dict[int, np.ndarray] = {}
    if features_path is not None:
        features_path = Path(features_path)
        if not features_path.exists():
            raise FileNotFoundError(f"dataset file not found: {features_path}")
        with open(features_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "query_id":
                raise ValidationError(f"{features_path}: first column must be query_id")
            d = len(header) - 1
            if d < 1:
                raise ValidationError(f"{features_path}: no feature columns")
            for lineno, row in enumerate(reader, start=2):
                where = f"{features_path}:{lineno}"
                if len(row) != d + 1:
                    raise ValidationError(f"{where}: expected {d + 1} columns, got {len(row)}")
                qid = _parse_int(row[0], where)
                if qid in feature_rows:
                    raise ValidationError(f"{where}: duplicate feature row for query {qid}")
                feature_rows[qid] = np.array(
                    [_parse_float(x, where) for x in row[1:]], dtype=np.float64
                )

    llm_rows = _read_rows(prices_path, ["llm_id", "name", "price_per_token"])
    llms = []
    seen = set()
    for lineno, row in enumerate(llm_rows, start=2):
        where = f"{prices_path}:{lineno}"
        k = _parse_int(row["llm_id"], where)
        if k in seen:
            raise ValidationError(f"{where}: duplicate llm_id {k}")
        seen.add(k)
        price = _parse_float(row["price_per_token"], where)
        if price < 0:
            raise ValidationError(f"{where}: negative price {price}")
        llms.append(LLMCandidate(id=k, name=row["name"], price_per_token=price))
    llms.sort(key=lambda l: l.id)

    query_rows = _read_rows(queries_path, ["query_id", "token_count"])
    queries = []
    seen = set()
    for lineno, row in enumerate(query_rows, start=2):
        where = f"{queries_path}:{lineno}"
        qid = _parse_int(row["query_id"], where)
        if qid in seen:
            raise ValidationError(f"{where}: duplicate query_id {qid}")
        seen.add(qid)
        tokens = _parse_int(row["token_count"], where)
        if tokens < 0:
            raise ValidationError(f"{where}: negative token_count {tokens}")
        text = row.get("text") or None
        features = feature_rows.get(qid)
        if features_path is not None and features is None and text is None:
            raise ValidationError(
                f"{where}: query {qid} has no row in {features_path} and no text"
            )
        queries.append(Query(id=qid, token_count=tokens, text=text, features=features))
    queries.sort(key=lambda q: q.id)

    unknown = set(feature_rows) - {q.id for q in queries}
    if unknown:
        raise ValidationError(f"{features_path}: feature rows for unknown query ids {sorted(unknown)}")

    n, m = len(queries), len(llms)
    label_rows = _read_rows(labels_path, ["query_id", "llm_id", "correct"])
    values = np.full((max(n, 1), max(m, 1)), np.nan)
    for lineno, row in enumerate(label_rows, start=2):
        where = f"{labels_path}:{lineno}"
        i = _parse_int(row["query_id"], where)
        k = _parse_int(row["llm_id"], where)
        if not (0 <= i < n and 0 <= k < m):
            raise ValidationError(f"{where}: label for unknown pair (query {i}, llm {k})")
        v = _parse_float(row["correct"], where)
        if v not in (0.0, 1.0):
            raise ValidationError(f"{where}: label must be 0 or 1, got {v}")
        if not np.isnan(values[i, k]):
            raise ValidationError(f"{where}: duplicate label for (query {i}, llm {k})")
        values[i, k] = v
    missing = np.argwhere(np.isnan(values[:n, :m]))
    if missing.size:
        i, k = missing[0]
        raise ValidationError(f"{labels_path}: missing label for (query {i}, llm {k})")

    overrides: dict[tuple[int, int], float] = {}
    if costs_path is not None and Path(costs_path).exists():
        cost_rows = _read_rows(Path(costs_path), ["query_id", "llm_id", "cost"])
        for lineno, row in enumerate(cost_rows, start=2):
            where = f"{costs_path}:{lineno}"
            i = _parse_int(row["query_id"], where)
            k = _parse_int(row["llm_id"], where)
            v = _parse_float(row["cost"], where)
            if v < 0:
                raise ValidationError(f"{where}: negative cost {v}")
            if (i, k) in overrides:
                raise ValidationError(f"{where}: duplicate cost override for ({i}, {k})")
            overrides[(i, k)] = v

    return Dataset(queries=queries, llms=llms, labels=LabelMatrix(values[:n, :m]), cost_overrides=overrides)


def load_dataset_dir(directory) -> Dataset:
    """Load a dataset directory using the conventional file names."""
    directory = Path(directory)
    features = directory / FEATURES_FILE
    costs = directory / COSTS_FILE
    return load_dataset(
        directory / QUERIES_FILE,
        directory / LABELS_FILE,
        directory / PRICES_FILE,
        features_path=features if features.exists() else None,
        costs_path=costs if costs.exists() else None,
    )


def save_dataset_dir(ds: Dataset, directory) -> None:
    """Write a dataset as the conventional table files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    with open(directory / QUERIES_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["query_id", "token_count", "text"])
        for q in ds.queries:
            w.writerow([q.id, q.token_count, q.text or ""])

    with open(directory / PRICES_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["llm_id", "name", "price_per_token"])
        for l in ds.llms:
            w.writerow([l.id, l.name, repr(l.price_per_token)])

    with open(directory / LABELS_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["query_id", "llm_id", "correct"])
        for i in range(ds.n):
            for k in range(ds.m):
                w.writerow([i, k, int(ds.labels.values[i, k])])

    features = ds.feature_array()
    if features is not None:
        with open(directory / FEATURES_FILE, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["query_id"] + [f"f{j}" for j in range(features.shape[1])])
            for i in range(ds.n):
                w.writerow([i] + [repr(float(x)) for x in features[i]])

    if ds.cost_overrides:
        with open(directory / COSTS_FILE, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["query_id", "llm_id", "cost"])
            for (i, k), v in sorted(ds.cost_overrides.items()):
                w.writerow([i, k, repr(v)])


# ---------------------------------------------------------------------------
# Prediction matrix files


def save_predictions(values: np.ndarray, path) -> None:
    """Long-form CSV (query_id, llm_id, p) of a prediction matrix."""
    values = np.asarray(values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["query_id", "llm_id", "p"])
        for i in range(values.shape[0]):
            for k in range(values.shape[1]):
                w.writerow([i, k, repr(float(values[i, k]))])


def load_predictions(path, n: int, m: int) -> np.ndarray:
    rows = _read_rows(Path(path), ["query_id", "llm_id", "p"])
    values = np.full((n, m), np.nan)
    for lineno, row in enumerate(rows, start=2):
        where = f"{path}:{lineno}"
        i = _parse_int(row["query_id"], where)
        k = _parse_int(row["llm_id"], where)
        if not (0 <= i < n and 0 <= k < m):
            raise ValidationError(f"{where}: prediction for unknown pair ({i}, {k})")
        if not np.isnan(values[i, k]):
            raise ValidationError(f"{where}: duplicate prediction for ({i}, {k})")
        values[i, k] = _parse_float(row["p"], where)
    missing = np.argwhere(np.isnan(values))
    if missing.size:
        i, k = missing[0]
        raise ValidationError(f"{path}: missing prediction for (query {i}, llm {k})")
    return values


# ---------------------------------------------------------------------------
# Archive and reference-front documents


def export_archive(archive: SolutionArchive, dataset: Dataset, path, metadata: dict | None = None) -> None:
    """Write the archive as a versioned JSON document.

    Includes per-solution assignments, predicted objectives, true objectives
    (the dataset carries full labels), and a flat plot table. Output bytes
    are a pure function of the inputs.
    """
    C = dataset.cost_matrix()
    solutions = []
    plot_rows = []
    for s in archive:
        true_obj = evaluate(s.assignment, C, dataset.labels)
        solutions.append(
            {
                "assignment": [int(k) for k in s.assignment],
                "cost": s.objectives.cost,
                "predicted_accuracy": s.objectives.accuracy,
                "true_accuracy": true_obj.accuracy,
            }
        )
        plot_rows.append([s.objectives.cost, s.objectives.accuracy, true_obj.accuracy])
    doc = {
        "format_version": ARCHIVE_FORMAT_VERSION,
        "kind": "solution_archive",
        "metadata": {"tool_version": _version, **(metadata or {})},
        "solutions": solutions,
        "plot_table": {"columns": ["cost", "predicted_acc", "true_acc"], "rows": plot_rows},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_archive(path) -> tuple[list[Solution], dict]:
    """Read back an exported archive; objectives are the predicted pair."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "solution_archive":
        raise ValidationError(f"{path}: not a solution archive document")
    if doc.get("format_version") != ARCHIVE_FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported archive format version")
    solutions = [
        Solution(
            assignment=np.array(entry["assignment"], dtype=np.int64),
            objectives=ObjectivePoint(cost=entry["cost"], accuracy=entry["predicted_accuracy"]),
        )
        for entry in doc["solutions"]
    ]
    return solutions, doc


def export_front(front: ReferenceFront, path, metadata: dict | None = None) -> None:
    doc = {
        "format_version": FRONT_FORMAT_VERSION,
        "kind": "reference_front",
        "metadata": {"tool_version": _version, **(metadata or {})},
        "provenance": front.provenance,
        "points": [{"cost": p.cost, "accuracy": p.accuracy} for p in front.points],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_front(path) -> ReferenceFront:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "reference_front":
        raise ValidationError(f"{path}: not a reference front document")
    if doc.get("format_version") != FRONT_FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported front format version")
    points = [ObjectivePoint(cost=p["cost"], accuracy=p["accuracy"]) for p in doc["points"]]
    return ReferenceFront(points=points, provenance=doc["provenance"])
