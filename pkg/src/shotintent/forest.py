"""Bagged decision-tree classifier: Gini splits, per-split feature subsampling.

Trees are stored as flat node arrays (feature, threshold, left, right, vote)
so trained forests serialize as plain tensors. Binary labels only: 0 = low,
1 = high. Tie votes at a leaf fall to class 0.
"""
from __future__ import annotations

import numpy as np

from .errors import SingleClassTraining


def _best_split(x_node, y_node, feature_ids):
    """Return (feature, threshold, weighted_gini) of the best candidate, or None."""
    n = y_node.shape[0]
    total1 = int(y_node.sum())
    best = None
    for f in feature_ids:
        col = x_node[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y_node[order]
        distinct = xs[1:] > xs[:-1]
        if not distinct.any():
            continue
        cum1 = np.cumsum(ys)[:-1]
        s = np.arange(1, n)
        n1l = cum1
        n1r = total1 - cum1
        with np.errstate(invalid="ignore"):
            gini_l = 1.0 - (n1l / s) ** 2 - ((s - n1l) / s) ** 2
            gini_r = 1.0 - (n1r / (n - s)) ** 2 - ((n - s - n1r) / (n - s)) ** 2
        weighted = s * gini_l + (n - s) * gini_r
        weighted[~distinct] = np.inf
        pos = int(np.argmin(weighted))
        if not np.isfinite(weighted[pos]):
            continue
        if best is None or weighted[pos] < best[2]:
            thr = 0.5 * (xs[pos] + xs[pos + 1])
            best = (int(f), float(thr), float(weighted[pos]))
    return best


class _TreeBuilder:
    def __init__(self, x, y, rng, max_features):
        self.x = x
        self.y = y
        self.rng = rng
        self.max_features = max_features
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.vote = []

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.vote.append(0)
        return len(self.feature) - 1

    def build(self, idx):
        node = self._new_node()
        stack = [(node, idx)]
        n_features = self.x.shape[1]
        while stack:
            node, idx = stack.pop()
            y_node = self.y[idx]
            ones = int(y_node.sum())
            if ones == 0 or ones == y_node.shape[0]:
                self.vote[node] = 1 if ones else 0
                continue
            feats = self.rng.choice(n_features, size=self.max_features, replace=False)
            split = _best_split(self.x[idx], y_node, np.sort(feats))
            if split is None:
                # indistinguishable points with mixed labels: majority, tie -> 0
                self.vote[node] = 1 if 2 * ones > y_node.shape[0] else 0
                continue
            f, thr, _ = split
            go_left = self.x[idx, f] <= thr
            self.feature[node] = f
            self.threshold[node] = thr
            left = self._new_node()
            right = self._new_node()
            self.left[node] = left
            self.right[node] = right
            stack.append((right, idx[~go_left]))
            stack.append((left, idx[go_left]))

    def arrays(self):
        return {
            "feature": np.asarray(self.feature, dtype=np.float64),
            "threshold": np.asarray(self.threshold, dtype=np.float64),
            "left": np.asarray(self.left, dtype=np.float64),
            "right": np.asarray(self.right, dtype=np.float64),
            "vote": np.asarray(self.vote, dtype=np.float64),
        }


def fit_forest(
    x: np.ndarray,
    y: np.ndarray,
    n_trees: int = 200,
    seed: int = 0,
    max_features: int | None = None,
) -> list[dict[str, np.ndarray]]:
    """Fit bagged trees on feature vectors; deterministic given seed."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    if len(np.unique(y)) < 2:
        raise SingleClassTraining("training data contains a single class")
    if max_features is None:
        max_features = max(1, int(np.sqrt(x.shape[1])))
    max_features = min(max_features, x.shape[1])
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        boot = rng.integers(0, n, size=n)
        builder = _TreeBuilder(x, y, rng, max_features)
        builder.build(boot)
        trees.append(builder.arrays())
    return trees


def _tree_votes(tree: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    feature = tree["feature"].astype(np.int64)
    left = tree["left"].astype(np.int64)
    right = tree["right"].astype(np.int64)
    threshold = tree["threshold"]
    vote = tree["vote"]
    out = np.empty(x.shape[0], dtype=np.float64)
    for i in range(x.shape[0]):
        node = 0
        while feature[node] >= 0:
            node = left[node] if x[i, feature[node]] <= threshold[node] else right[node]
        out[i] = vote[node]
    return out


def forest_predict_proba(trees: list[dict[str, np.ndarray]], x: np.ndarray) -> np.ndarray:
    """Fraction of trees voting class 1, per row of x."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    votes = np.zeros(x.shape[0], dtype=np.float64)
    for tree in trees:
        votes += _tree_votes(tree, x)
    return votes / len(trees)
