"""Bagged CART forests (Gini splits) used as the ensemble base learner.

One binary forest per LLM; a multi-label classifier is m independent
forests. Trees are stored as flat node arrays so models persist exactly
and prediction runs as a tight kernel. Tree fitting and prediction are
dual-path: a numba build and a NumPy build that perform identical
floating-point operations, so both paths grow identical trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._accel import njit, pick
from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class ForestConfig:
    """Forest hyper-parameters; defaults are deliberately conservative."""

    n_trees: int = 20
    max_depth: int = 8
    min_leaf: int = 2
    n_sub_features: int | None = None  # None -> ceil(sqrt(d)) per tree

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_leaf < 1:
            raise ValidationError("forest config values must be positive")
        if self.n_sub_features is not None and self.n_sub_features < 1:
            raise ValidationError("n_sub_features must be positive when given")

    def sub_features(self, d: int) -> int:
        if self.n_sub_features is not None:
            return min(self.n_sub_features, d)
        return min(d, math.ceil(math.sqrt(d)))


class Tree(NamedTuple):
    """Flat CART tree; feature < 0 marks a leaf, feature ids are absolute."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray


@njit(cache=True)
def _fit_tree_nb(X, y, max_depth, min_leaf):
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)

    idx = np.arange(n)
    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    stack_node[sp] = 0
    stack_start[sp] = 0
    stack_end[sp] = n
    stack_depth[sp] = 0
    sp += 1
    n_nodes = 1

    vals = np.empty(n, dtype=np.float64)
    tmp = np.empty(n, dtype=np.int64)

    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        cnt = end - start

        pos = 0.0
        for t in range(start, end):
            pos += y[idx[t]]
        cntf = float(cnt)
        value[node] = pos / cntf

        if depth >= max_depth or cnt < 2 * min_leaf or pos == 0.0 or pos == cntf:
            continue

        best_score = pos * (cntf - pos) / cntf
        best_f = -1
        best_thr = 0.0
        best_left_max = 0.0
        best_nl = 0

        for f in range(d):
            for t in range(cnt):
                vals[t] = X[idx[start + t], f]
            order = np.argsort(vals[:cnt], kind="mergesort")
            cpos = 0.0
            for t in range(1, cnt):
                cpos += y[idx[start + order[t - 1]]]
                v_prev = vals[order[t - 1]]
                v_here = vals[order[t]]
                if v_here == v_prev:
                    continue
                if t < min_leaf or cnt - t < min_leaf:
                    continue
                nl = float(t)
                nr = float(cnt - t)
                pos_l = cpos
                pos_r = pos - cpos
                score = pos_l * (nl - pos_l) / nl + pos_r * (nr - pos_r) / nr
                if score < best_score:
                    best_score = score
                    best_f = f
                    best_thr = (v_prev + v_here) / 2.0
                    best_left_max = v_prev
                    best_nl = t

        if best_f < 0:
            continue

        a = 0
        for t in range(cnt):
            if X[idx[start + t], best_f] <= best_left_max:
                tmp[a] = idx[start + t]
                a += 1
        b = a
        for t in range(cnt):
            if X[idx[start + t], best_f] > best_left_max:
                tmp[b] = idx[start + t]
                b += 1
        for t in range(cnt):
            idx[start + t] = tmp[t]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lchild
        right[node] = rchild

        stack_node[sp] = rchild
        stack_start[sp] = start + best_nl
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = lchild
        stack_start[sp] = start
        stack_end[sp] = start + best_nl
        stack_depth[sp] = depth + 1
        sp += 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


def _fit_tree_np(X, y, max_depth, min_leaf):
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)

    n_nodes = 1
    stack = [(0, np.arange(n), 0)]

    while stack:
        node, node_idx, depth = stack.pop()
        cnt = node_idx.shape[0]
        ysub = y[node_idx]
        pos = float(np.add.accumulate(ysub)[-1])
        cntf = float(cnt)
        value[node] = pos / cntf

        if depth >= max_depth or cnt < 2 * min_leaf or pos == 0.0 or pos == cntf:
            continue

        best_score = pos * (cntf - pos) / cntf
        best_f = -1
        best_thr = 0.0
        best_left_max = 0.0
        best_nl = 0

        t = np.arange(1, cnt)
        nl = t.astype(np.float64)
        nr = (cnt - t).astype(np.float64)
        size_ok = (t >= min_leaf) & (cnt - t >= min_leaf)
        for f in range(d):
            vals = X[node_idx, f]
            order = np.argsort(vals, kind="mergesort")
            sv = vals[order]
            cpos = np.cumsum(ysub[order])
            valid = (sv[1:] != sv[:-1]) & size_ok
            if not valid.any():
                continue
            pos_l = cpos[:-1]
            pos_r = pos - pos_l
            score = pos_l * (nl - pos_l) / nl + pos_r * (nr - pos_r) / nr
            score = np.where(valid, score, np.inf)
            ti = int(np.argmin(score))
            sc = float(score[ti])
            if sc < best_score:
                best_score = sc
                best_f = f
                best_thr = (float(sv[ti]) + float(sv[ti + 1])) / 2.0
                best_left_max = float(sv[ti])
                best_nl = ti + 1

        if best_f < 0:
            continue

        mask = X[node_idx, best_f] <= best_left_max
        left_idx = node_idx[mask]
        right_idx = node_idx[~mask]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lchild
        right[node] = rchild

        stack.append((rchild, right_idx, depth + 1))
        stack.append((lchild, left_idx, depth + 1))

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


_fit_tree = pick(_fit_tree_nb, _fit_tree_np)


@njit(cache=True)
def _forest_predict_nb(feat, thr, left, right, value, offsets, X, out):
    n_trees = offsets.shape[0] - 1
    nq = X.shape[0]
    for t in range(n_trees):
        base = offsets[t]
        for i in range(nq):
            node = 0
            while feat[base + node] >= 0:
                if X[i, feat[base + node]] <= thr[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[i] += value[base + node]


def _forest_predict_np(feat, thr, left, right, value, offsets, X, out):
    n_trees = offsets.shape[0] - 1
    nq = X.shape[0]
    for t in range(n_trees):
        base = offsets[t]
        node = np.zeros(nq, dtype=np.int64)
        while True:
            f = feat[base + node]
            active = f >= 0
            if not active.any():
                break
            rows = np.where(active)[0]
            sub = base + node[rows]
            go_left = X[rows, f[rows]] <= thr[sub]
            node[rows] = np.where(go_left, left[sub], right[sub])
        out += value[base + node]


_forest_predict = pick(_forest_predict_nb, _forest_predict_np)


class BinaryForest:
    """Bagged trees predicting P(label=1) for one LLM column."""

    def __init__(self, trees: list[Tree], n_features: int):
        self.trees = trees
        self.n_features = n_features
        self._packed = None

    def _pack(self):
        if self._packed is None:
            counts = np.array([t.feature.shape[0] for t in self.trees], dtype=np.int64)
            offsets = np.zeros(len(self.trees) + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            self._packed = (
                np.concatenate([t.feature for t in self.trees]),
                np.concatenate([t.threshold for t in self.trees]),
                np.concatenate([t.left for t in self.trees]),
                np.concatenate([t.right for t in self.trees]),
                np.concatenate([t.value for t in self.trees]),
                offsets,
            )
        return self._packed

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(
                f"expected features of shape (*, {self.n_features}), got {X.shape}"
            )
        feat, thr, left, right, value, offsets = self._pack()
        out = np.zeros(X.shape[0], dtype=np.float64)
        _forest_predict(feat, thr, left, right, value, offsets, X, out)
        return out / float(len(self.trees))


def fit_forest(
    X: np.ndarray, y: np.ndarray, config: ForestConfig, rng: np.random.Generator
) -> BinaryForest:
    """Fit one bagged forest: per-tree row bootstrap plus feature subsampling."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError(f"bad training shapes X={X.shape}, y={y.shape}")
    n, d = X.shape
    if n == 0:
        raise ValidationError("cannot fit a forest on zero samples")
    k = config.sub_features(d)
    trees = []
    for _ in range(config.n_trees):
        rows = rng.integers(0, n, size=n)
        feats = np.sort(rng.permutation(d)[:k]).astype(np.int64)
        Xsub = np.ascontiguousarray(X[rows][:, feats])
        ysub = y[rows]
        feature, threshold, left, right, value = _fit_tree(
            Xsub, ysub, config.max_depth, config.min_leaf
        )
        split = feature >= 0
        feature = feature.copy()
        feature[split] = feats[feature[split]]
        trees.append(Tree(feature, threshold, left, right, value))
    return BinaryForest(trees, n_features=d)


class MultiLabelForest:
    """m independent binary forests sharing one feature space."""

    def __init__(self, forests: list[BinaryForest]):
        if not forests:
            raise ValidationError("need at least one per-LLM forest")
        self.forests = forests
        self.n_features = forests[0].n_features

    @property
    def n_labels(self) -> int:
        return len(self.forests)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-LLM success probabilities, shape (n_queries, m)."""
        cols = [f.predict_proba(X) for f in self.forests]
        return np.stack(cols, axis=1)


def fit_multilabel(
    X: np.ndarray, Y: np.ndarray, config: ForestConfig, rng: np.random.Generator
) -> MultiLabelForest:
    """Fit one forest per label column, consuming the generator in column order."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] != np.asarray(X).shape[0]:
        raise ShapeError(f"label matrix shape {Y.shape} does not match X")
    return MultiLabelForest([fit_forest(X, Y[:, k], config, rng) for k in range(Y.shape[1])])
