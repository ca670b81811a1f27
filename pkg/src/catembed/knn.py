"""Distance-weighted k-nearest-neighbour regression.

The brute-force scan is the reference. Neighbours are ordered by
(distance, row index), so ties at the k-th distance go to the lowest row
index of the training order given to ``fit``. A query that coincides with
training rows returns the mean target of those zero-distance neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


@numba.njit(cache=True)
def _distance(a, b, p):
    acc = 0.0
    if p == 1.0:
        for t in range(a.size):
            acc += abs(a[t] - b[t])
        return acc
    if p == 2.0:
        for t in range(a.size):
            diff = a[t] - b[t]
            acc += diff * diff
        return np.sqrt(acc)
    for t in range(a.size):
        acc += abs(a[t] - b[t]) ** p
    return acc ** (1.0 / p)


@numba.njit(cache=True)
def _aggregate(dist, targets):
    n_zero = 0
    zero_sum = 0.0
    for i in range(dist.size):
        if dist[i] == 0.0:
            n_zero += 1
            zero_sum += targets[i]
    if n_zero > 0:
        return zero_sum / n_zero
    num = 0.0
    den = 0.0
    for i in range(dist.size):
        w = 1.0 / dist[i]
        num += targets[i] * w
        den += w
    return num / den


@numba.njit(cache=True)
def _select(Q, X, rows, p, k):
    """k nearest of ``rows`` (ascending ids) for every query row of ``Q``."""
    nq = Q.shape[0]
    out_idx = np.empty((nq, k), dtype=np.int64)
    out_d = np.empty((nq, k))
    for qi in range(nq):
        filled = 0
        bd = out_d[qi]
        bi = out_idx[qi]
        for r_pos in range(rows.size):
            r = rows[r_pos]
            d = _distance(Q[qi], X[r], p)
            if filled == k and not d < bd[k - 1]:
                continue
            # insert after every entry with distance <= d
            pos = filled if filled < k else k - 1
            while pos > 0 and bd[pos - 1] > d:
                if pos < k:
                    bd[pos] = bd[pos - 1]
                    bi[pos] = bi[pos - 1]
                pos -= 1
            bd[pos] = d
            bi[pos] = r
            if filled < k:
                filled += 1
    return out_idx, out_d


@numba.njit(cache=True)
def _predict_brute(Q, X, y, p, k):
    rows = np.arange(X.shape[0])
    idx, dist = _select(Q, X, rows, p, k)
    out = np.empty(Q.shape[0])
    for qi in range(Q.shape[0]):
        out[qi] = _aggregate(dist[qi], y[idx[qi]])
    return out


@dataclass
class KnnModel:
    features: np.ndarray
    targets: np.ndarray
    k: int = 10
    minkowski_p: float = 1.0
    weighting: str = "distance"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.features.shape[0] != self.targets.shape[0]:
            raise ValueError("one target per feature row is required")
        if self.minkowski_p <= 0:
            raise ValueError("minkowski_p must be positive")
        if self.weighting != "distance":
            raise ValueError("only distance weighting is supported")


def fit_knn(features, targets, k: int = 10, p: float = 1.0) -> KnnModel:
    features = np.ascontiguousarray(features, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if k > features.shape[0]:
        raise ValueError(f"k={k} exceeds the {features.shape[0]} stored rows")
    return KnnModel(features, targets, int(k), float(p))


def _queries(m: KnnModel, x) -> np.ndarray:
    q = np.ascontiguousarray(x, dtype=np.float64)
    if q.ndim == 1:
        q = q[None, :]
    if q.shape[1] != m.features.shape[1]:
        raise ValueError(f"query width {q.shape[1]} != {m.features.shape[1]}")
    return q


def predict_knn(m: KnnModel, x) -> np.ndarray:
    """Brute-force scan over every stored row."""
    return _predict_brute(_queries(m, x), m.features, m.targets, m.minkowski_p, m.k)


class KDTreeIndex:
    """KD-tree accelerated queries that reproduce :func:`predict_knn` exactly.

    The tree only proposes candidates (every row within the k-th distance,
    padded by a relative margin); final distances, ordering and weights come
    from the same kernels as the brute-force scan.
    """

    def __init__(self, model: KnnModel):
        self.model = model
        self.tree = cKDTree(model.features)

    def predict(self, x) -> np.ndarray:
        m = self.model
        q = _queries(m, x)
        kth, _ = self.tree.query(q, k=m.k, p=m.minkowski_p)
        kth = np.asarray(kth).reshape(q.shape[0], -1)[:, -1]
        out = np.empty(q.shape[0])
        for i in range(q.shape[0]):
            radius = kth[i] * (1 + 1e-9) + 1e-12
            cand = np.sort(np.asarray(
                self.tree.query_ball_point(q[i], radius, p=m.minkowski_p), dtype=np.int64))
            if cand.size < m.k:
                raise RuntimeError(f"query {i}: KD-tree proposed {cand.size} < k candidates")
            idx, dist = _select(q[i:i + 1], m.features, cand, m.minkowski_p, m.k)
            out[i] = _aggregate(dist[0], m.targets[idx[0]])
        return out


class KNNRegressor(RegressorMixin, BaseEstimator):
    """Defaults follow the benchmark configuration (k=10, L1, distance weights)."""

    def __init__(self, n_neighbors=10, p=1.0, algorithm="brute"):
        self.n_neighbors = n_neighbors
        self.p = p
        self.algorithm = algorithm

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.model_ = fit_knn(X, y, self.n_neighbors, self.p)
        if self.algorithm == "kd_tree":
            self.index_ = KDTreeIndex(self.model_)
        elif self.algorithm != "brute":
            raise ValueError("algorithm must be 'brute' or 'kd_tree'")
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if self.algorithm == "kd_tree":
            return self.index_.predict(X)
        return predict_knn(self.model_, X)
