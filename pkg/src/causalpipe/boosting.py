"""Least-squares gradient-boosted regression trees.

Small, deterministic implementation used for the nuisance and effect
models of the metalearners. Splits are exhaustive scans over midpoints
of consecutive sorted unique feature values, maximizing weighted
variance reduction; ties resolve to the lowest feature index, then the
lowest threshold, so refits are bit-identical. No subsampling and no
early stopping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import ValidationError
from .validation import check_is_fitted, check_matrix, check_same_length, check_vector


@dataclass(frozen=True)
class BoostParams:
    """Hyperparameters for a boosted ensemble."""

    n_estimators: int = 200
    max_depth: int = 3
    learning_rate: float = 0.05
    min_leaf: int = 20

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValidationError("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError("learning_rate must be in (0, 1]")
        if self.min_leaf < 1:
            raise ValidationError("min_leaf must be >= 1")


@dataclass(frozen=True)
class Tree:
    """Flat-array binary regression tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
        return self.value[node]


class _TreeBuilder:
    """Grows one tree from per-feature presorted row-index matrices.

    A node carries an (n_features, node_size) matrix whose row f lists
    the node's rows sorted by feature f; splitting partitions every row
    of that matrix stably, so nothing is re-sorted below the root and
    the split search runs on batched 2-D gathers.
    """

    def __init__(self, values, min_leaf, max_depth):
        self.values = values  # (n_features, n) feature-major copy of X
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.feature_axis = np.arange(values.shape[0])[:, None]

    def build(self, residual, weight, root_orders):
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node():
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            return len(feature) - 1

        root = new_node()
        stack = [(root, root_orders, 0)]
        while stack:
            node_id, orders, depth = stack.pop()
            rows = orders[0]
            g = residual[rows]
            if weight is None:
                value[node_id] = float(g.mean())
            else:
                w = weight[rows]
                wsum = w.sum()
                value[node_id] = float((w @ g) / wsum) if wsum > 0 else 0.0
            if depth >= self.max_depth or len(rows) < 2 * self.min_leaf:
                continue
            split = self._best_split(orders, residual, weight)
            if split is None:
                continue
            f, thr = split
            feature[node_id] = f
            threshold[node_id] = thr
            go_left = self.values[f][orders] <= thr
            m_left = int(go_left[0].sum())
            left_orders = orders[go_left].reshape(orders.shape[0], m_left)
            right_orders = orders[~go_left].reshape(orders.shape[0], -1)
            lid = new_node()
            rid = new_node()
            left[node_id] = lid
            right[node_id] = rid
            stack.append((rid, right_orders, depth + 1))
            stack.append((lid, left_orders, depth + 1))
        return Tree(
            feature=np.asarray(feature, dtype=np.int64),
            threshold=np.asarray(threshold, dtype=np.float64),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            value=np.asarray(value, dtype=np.float64),
        )

    def _best_split(self, orders, residual, weight):
        m = orders.shape[1]
        lo = self.min_leaf - 1
        hi = m - self.min_leaf  # split positions j in [lo, hi): left gets j+1 rows
        if hi <= lo:
            return None
        V = self.values[self.feature_axis, orders]
        G = residual[orders]
        if weight is None:
            cg = np.cumsum(G, axis=1)
            wl = np.arange(lo + 1, hi + 1, dtype=np.float64)[None, :]
            wr = m - wl
            wsum = float(m)
        else:
            W = weight[orders]
            cw = np.cumsum(W, axis=1)
            cg = np.cumsum(W * G, axis=1)
            wl = cw[:, lo:hi]
            wr = cw[:, -1:] - wl
            wsum = float(cw[0, -1])
        if wsum <= 0.0:
            return None
        valid = V[:, lo:hi] < V[:, lo + 1 : hi + 1]
        if weight is not None:
            valid &= (wl > 0.0) & (wr > 0.0)
        if not valid.any():
            return None
        total = float(cg[0, -1])
        parent = total * total / wsum
        sl = cg[:, lo:hi]
        score = np.square(sl)
        np.divide(score, wl, out=score, where=wl > 0.0)
        sr = cg[:, -1:] - sl
        np.square(sr, out=sr)
        np.divide(sr, wr, out=sr, where=wr > 0.0)
        score += sr
        np.copyto(score, -np.inf, where=~valid)
        best_gain = 0.0
        best = None
        for f in range(score.shape[0]):
            j = int(np.argmax(score[f]))  # first max -> lowest threshold on ties
            if not valid[f, j]:
                continue
            gain = float(score[f, j] - parent)
            if gain > best_gain:
                best_gain = gain
                best = (f, float((V[f, lo + j] + V[f, lo + j + 1]) / 2.0))
        return best


class BoostedTreeRegressor(BaseEstimator, RegressorMixin):
    """Gradient-boosted regression trees with squared-error loss.

    Fitting is deterministic for a given dataset and row order; the
    ``random_state`` parameter exists for estimator-API compatibility and
    is unused because there is no stochastic subsampling. When the target
    has zero variance the ensemble reduces to its base value.

    Attributes (after fit)
    ----------------------
    base_value_ : float
        Mean of the training target (weighted when weights are given).
    trees_ : tuple of Tree
        Exactly ``n_estimators`` trees.
    """

    def __init__(self, n_estimators=200, max_depth=3, learning_rate=0.05,
                 min_leaf=20, random_state=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.random_state = random_state

    def _params(self):
        return BoostParams(
            n_estimators=self.n_estimators,
            max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_leaf=self.min_leaf,
        )

    def fit(self, X, y, sample_weight=None):
        params = self._params()
        X = check_matrix(X, "X")
        y = check_vector(y, "y")
        check_same_length(X, y, names=["X", "y"])
        if sample_weight is None:
            w = np.ones(len(y))
        else:
            w = check_vector(sample_weight, "sample_weight")
            check_same_length(y, w, names=["y", "sample_weight"])
            if np.any(w < 0.0) or w.sum() <= 0.0:
                raise ValidationError("sample_weight must be nonnegative with positive sum")
        if len(y) < 2 * params.min_leaf:
            raise ValidationError(
                f"need at least {2 * params.min_leaf} rows for min_leaf={params.min_leaf}"
            )

        self.n_features_in_ = X.shape[1]
        if np.ptp(y) == 0.0:
            self.base_value_ = float(y[0])
            residual = np.zeros(len(y))
        else:
            self.base_value_ = float((w @ y) / w.sum())
            residual = y - self.base_value_
        values = np.ascontiguousarray(X.T)
        root_orders = np.vstack([np.argsort(col, kind="stable") for col in values])
        weight = None if sample_weight is None else w
        builder = _TreeBuilder(values, params.min_leaf, params.max_depth)
        trees = []
        for _ in range(params.n_estimators):
            tree = builder.build(residual, weight, root_orders)
            trees.append(tree)
            residual = residual - params.learning_rate * tree.predict(X)
        self.trees_ = tuple(trees)
        return self

    def predict(self, X):
        check_is_fitted(self, "trees_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {X.shape[1]} features, model was fit with {self.n_features_in_}"
            )
        out = np.full(X.shape[0], self.base_value_)
        for tree in self.trees_:
            out += self.learning_rate * tree.predict(X)
        return out


def fit_gbm(features, target, params=None, sample_weight=None, seed=None):
    """Fit a boosted ensemble from a BoostParams bundle."""
    params = params or BoostParams()
    model = BoostedTreeRegressor(
        n_estimators=params.n_estimators,
        max_depth=params.max_depth,
        learning_rate=params.learning_rate,
        min_leaf=params.min_leaf,
        random_state=seed,
    )
    return model.fit(features, target, sample_weight=sample_weight)
