"""Bootstrap ensemble of multi-label forests with robustness-shifted output.

``u`` classifiers are each trained on a with-replacement resample of the
training set and weighted by their cell-level validation accuracy. The
final per-(query, LLM) prediction is the weighted mean across classifiers
shifted by ``alpha`` times the cross-classifier standard deviation, clamped
to [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Query, _freeze
from .errors import (
    DegenerateEnsembleError,
    IncompleteInputError,
    ShapeError,
    ValidationError,
)
from .featurize import DEFAULT_DIM, featurize
from .forest import BinaryForest, ForestConfig, MultiLabelForest, Tree, fit_multilabel

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PredictionMatrix:
    """Robust predicted success probabilities, shape (n, m), entries in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.ndim != 2:
            raise ShapeError(f"prediction matrix must be 2-d, got ndim={v.ndim}")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValidationError("prediction matrix entries must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass
class EnsembleModel:
    """u weighted classifiers plus the robustness parameter."""

    classifiers: list[MultiLabelForest]
    weights: np.ndarray
    alpha: float
    feature_dim: int
    forest_config: ForestConfig

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.classifiers) != self.weights.shape[0]:
            raise ShapeError("one weight per classifier required")

    @property
    def n_samples(self) -> int:
        return len(self.classifiers)

    @property
    def n_llms(self) -> int:
        return self.classifiers[0].n_labels


def _check_labeled(X, Y, name):
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeError(f"{name}: features {X.shape} and labels {Y.shape} do not align")
    if X.shape[0] == 0:
        raise ValidationError(f"{name}: must be non-empty")
    if Y.size and not np.all((Y == 0.0) | (Y == 1.0)):
        raise ValidationError(f"{name}: labels must be binary")
    return X, Y


def train_ensemble(
    train: tuple[np.ndarray, np.ndarray],
    val: tuple[np.ndarray, np.ndarray],
    u: int,
    alpha: float,
    seed: int,
    forest_config: ForestConfig | None = None,
) -> EnsembleModel:
    """Fit u bootstrap classifiers; weight each by validation cell accuracy.

    Classifier j draws its own random stream from (seed, j), so training is
    reproducible and the samples could be fit in any order.
    """
    if u < 1:
        raise ValidationError(f"invalid parameter: bootstrap count u must be >= 1, got {u}")
    config = forest_config or ForestConfig()
    X_train, Y_train = _check_labeled(*train, name="train")
    X_val, Y_val = _check_labeled(*val, name="val")
    if X_train.shape[1] != X_val.shape[1]:
        raise ShapeError("train and val feature dimensions differ")
    if Y_train.shape[1] != Y_val.shape[1]:
        raise ShapeError("train and val label widths differ")

    n_train = X_train.shape[0]
    classifiers = []
    weights = np.zeros(u, dtype=np.float64)
    for j in range(1, u + 1):
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, j])
        rows = rng.integers(0, n_train, size=n_train)
        clf = fit_multilabel(X_train[rows], Y_train[rows], config, rng)
        preds = clf.predict_proba(X_val)
        hard = (preds >= 0.5).astype(np.float64)
        weights[j - 1] = float(np.mean(hard == Y_val))
        classifiers.append(clf)

    if not np.any(weights > 0.0):
        raise DegenerateEnsembleError("all bootstrap samples scored zero on validation")
    return EnsembleModel(
        classifiers=classifiers,
        weights=weights,
        alpha=float(alpha),
        feature_dim=X_train.shape[1],
        forest_config=config,
    )


def aggregate(per_sample_preds, weights) -> float:
    """Weighted mean of per-classifier predictions."""
    p = np.asarray(per_sample_preds, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if p.shape != w.shape or p.ndim != 1:
        raise ShapeError(f"predictions {p.shape} and weights {w.shape} must be equal-length vectors")
    total = float(w.sum())
    if not total > 0.0:
        raise DegenerateEnsembleError("sum of ensemble weights must be positive")
    return float((w * p).sum() / total)


def _robust_rows(model: EnsembleModel, X: np.ndarray) -> np.ndarray:
    """Robust predictions for a feature block, shape (n, m)."""
    u = model.n_samples
    w = model.weights
    total_w = float(w.sum())
    if not total_w > 0.0:
        raise DegenerateEnsembleError("sum of ensemble weights must be positive")
    shape = (X.shape[0], model.n_llms)
    s1 = np.zeros(shape)
    s2 = np.zeros(shape)
    ws = np.zeros(shape)
    pmin = np.full(shape, np.inf)
    pmax = np.full(shape, -np.inf)
    for j, clf in enumerate(model.classifiers):
        p = clf.predict_proba(X)
        s1 += p
        s2 += p * p
        ws += w[j] * p
        np.minimum(pmin, p, out=pmin)
        np.maximum(pmax, p, out=pmax)
    mean = s1 / u
    wmean = ws / total_w
    var = np.maximum(s2 / u - mean * mean, 0.0)
    # cells where every classifier agrees have sigma exactly 0; the streaming
    # formula would otherwise leave a ~1e-17 cancellation residue there
    sigma = np.where(pmax > pmin, np.sqrt(var), 0.0)
    return np.clip(wmean + model.alpha * sigma, 0.0, 1.0)


def predict_robust(model: EnsembleModel, features) -> np.ndarray:
    """Per-LLM robust success probabilities for one feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.feature_dim:
        raise ShapeError(
            f"expected a feature vector of dimension {model.feature_dim}, got shape {x.shape}"
        )
    return _robust_rows(model, np.ascontiguousarray(x[None, :]))[0]


def query_features(query: Query, d: int) -> np.ndarray:
    """A query's feature vector: precomputed if present, else hashed text."""
    if query.features is not None:
        if query.features.shape[0] != d:
            raise ShapeError(
                f"query {query.id}: feature dimension {query.features.shape[0]} != {d}"
            )
        return query.features
    if query.text is not None:
        return featurize(query.text, d)
    raise IncompleteInputError(f"query {query.id} has neither text nor features")


def feature_table(queries: list[Query], d: int | None = None) -> np.ndarray:
    """Stack per-query feature vectors, hashing text where needed."""
    if d is None:
        dims = {q.features.shape[0] for q in queries if q.features is not None}
        if len(dims) > 1:
            raise ShapeError(f"inconsistent precomputed feature dimensions: {sorted(dims)}")
        d = dims.pop() if dims else DEFAULT_DIM
    rows = [query_features(q, d) for q in queries]
    if not rows:
        return np.zeros((0, d))
    return np.ascontiguousarray(np.stack(rows))


def build_prediction_matrix(model: EnsembleModel, queries: list[Query]) -> PredictionMatrix:
    """Robust predictions for a query batch; row i is predict_robust(query i)."""
    if not queries:
        return PredictionMatrix(np.zeros((0, model.n_llms)))
    X = feature_table(queries, model.feature_dim)
    return PredictionMatrix(_robust_rows(model, X))


def save_model(model: EnsembleModel, path) -> None:
    """Persist the ensemble to a single .npz archive (exact round-trip)."""
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "alpha": model.alpha,
        "feature_dim": model.feature_dim,
        "u": model.n_samples,
        "n_llms": model.n_llms,
        "featurizer": {"kind": "signed_hash_crc32", "dim": model.feature_dim},
        "forest_config": {
            "n_trees": model.forest_config.n_trees,
            "max_depth": model.forest_config.max_depth,
            "min_leaf": model.forest_config.min_leaf,
            "n_sub_features": model.forest_config.n_sub_features,
        },
    }
    feature, threshold, left, right, value, counts = [], [], [], [], [], []
    for clf in model.classifiers:
        for forest in clf.forests:
            for tree in forest.trees:
                feature.append(tree.feature)
                threshold.append(tree.threshold)
                left.append(tree.left)
                right.append(tree.right)
                value.append(tree.value)
                counts.append(tree.feature.shape[0])
    np.savez_compressed(
        path,
        meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        weights=model.weights,
        node_counts=np.array(counts, dtype=np.int64),
        node_feature=np.concatenate(feature),
        node_threshold=np.concatenate(threshold),
        node_left=np.concatenate(left),
        node_right=np.concatenate(right),
        node_value=np.concatenate(value),
    )


def load_model(path) -> EnsembleModel:
    """Load an ensemble saved by save_model."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValidationError(
                f"unsupported model format version: {meta.get('format_version')}"
            )
        weights = data["weights"]
        counts = data["node_counts"]
        feature = data["node_feature"]
        threshold = data["node_threshold"]
        left = data["node_left"]
        right = data["node_right"]
        value = data["node_value"]

    fc = meta["forest_config"]
    config = ForestConfig(
        n_trees=fc["n_trees"],
        max_depth=fc["max_depth"],
        min_leaf=fc["min_leaf"],
        n_sub_features=fc["n_sub_features"],
    )
    u = meta["u"]
    m = meta["n_llms"]
    d = meta["feature_dim"]
    offsets = np.zeros(counts.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])

    trees = []
    for t in range(counts.shape[0]):
        lo, hi = offsets[t], offsets[t + 1]
        trees.append(
            Tree(
                feature[lo:hi].copy(),
                threshold[lo:hi].copy(),
                left[lo:hi].copy(),
                right[lo:hi].copy(),
                value[lo:hi].copy(),
            )
        )
    expected = u * m * config.n_trees
    if len(trees) != expected:
        raise ValidationError(f"model holds {len(trees)} trees, expected {expected}")

    classifiers = []
    pos = 0
    for _ in range(u):
        forests = []
        for _ in range(m):
            forests.append(BinaryForest(trees[pos : pos + config.n_trees], n_features=d))
            pos += config.n_trees
        classifiers.append(MultiLabelForest(forests))
    return EnsembleModel(
        classifiers=classifiers,
        weights=weights,
        alpha=float(meta["alpha"]),
        feature_dim=d,
        forest_config=config,
    )
