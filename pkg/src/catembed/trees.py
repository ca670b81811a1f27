"""CART regression trees, bootstrap random forests and first-order boosting.

Trees are stored as flat node arrays (preorder ids, root 0). Splits route
``x[j] <= s`` to the left child. Growth runs in a numba kernel that keeps
every candidate feature presorted and stably partitions the sorted index
lists at each node, so a split search costs O(node size) per feature.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numba
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

DUMP_HEADER = "catembed-tree v1"
# a split must lower node SSE by more than this relative amount
SPLIT_REL_TOL = 1e-12


@dataclass
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    features_per_split: int | str = "all"
    prune_alpha: float | None = None

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.prune_alpha is not None and self.prune_alpha < 0:
            raise ValueError("prune_alpha must be nonnegative")

    def n_split_features(self, n_features: int) -> int:
        if self.features_per_split in ("all", None):
            return n_features
        m = int(self.features_per_split)
        if not 1 <= m <= n_features:
            raise ValueError(f"features_per_split must lie in [1, {n_features}]")
        return m


class TreeNode(NamedTuple):
    id: int
    kind: str  # "internal" or "leaf"
    feature: int
    threshold: float
    value: float
    count: int
    left: int
    right: int


@numba.njit(cache=True)
def _midpoint(a, b):
    s = a + (b - a) * 0.5
    if s >= b:
        s = a
    return s


@numba.njit(cache=True)
def _grow_kernel(X, y, rows, order, features, max_depth, min_split, min_leaf,
                 max_features, seed, rel_tol):
    n_total = X.shape[0]
    n = rows.size
    nf = features.size
    np.random.seed(seed)

    yl = np.empty(n)
    for k in range(n):
        yl[k] = y[rows[k]]

    # local positions of each row (rows is sorted, duplicates are contiguous)
    first = np.full(n_total, -1, dtype=np.int64)
    mult = np.zeros(n_total, dtype=np.int64)
    for k in range(n):
        r = rows[k]
        if first[r] < 0:
            first[r] = k
        mult[r] += 1
    # P[a]: local positions sorted by feature a; V[a]: the matching values
    P = np.empty((nf, n), dtype=np.int64)
    V = np.empty((nf, n))
    for a in range(nf):
        j = features[a]
        c = 0
        for q in range(n_total):
            r = order[j, q]
            f = first[r]
            if f >= 0:
                xv = X[r, j]
                for t in range(mult[r]):
                    P[a, c] = f + t
                    V[a, c] = xv
                    c += 1

    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    val = np.zeros(cap)
    cnt = np.zeros(cap, dtype=np.int64)

    st_s = np.empty(cap, dtype=np.int64)
    st_e = np.empty(cap, dtype=np.int64)
    st_d = np.empty(cap, dtype=np.int64)
    st_p = np.empty(cap, dtype=np.int64)
    st_side = np.empty(cap, dtype=np.int64)
    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)
    vbuf = np.empty(n)
    perm = np.empty(nf, dtype=np.int64)

    sp = 0
    st_s[0] = 0
    st_e[0] = n
    st_d[0] = 0
    st_p[0] = -1
    st_side[0] = 0
    sp = 1
    node_count = 0
    while sp > 0:
        sp -= 1
        s = st_s[sp]
        e = st_e[sp]
        depth = st_d[sp]
        parent = st_p[sp]
        nid = node_count
        node_count += 1
        if parent >= 0:
            if st_side[sp] == 0:
                left[parent] = nid
            else:
                right[parent] = nid

        m = e - s
        total = 0.0
        ymin = np.inf
        ymax = -np.inf
        for k in range(s, e):
            v = yl[P[0, k]] if nf > 0 else yl[k]
            total += v
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        mean = total / m
        sse = 0.0
        csum = 0.0
        for k in range(s, e):
            v = (yl[P[0, k]] if nf > 0 else yl[k]) - mean
            csum += v
            sse += v * v
        val[nid] = mean
        cnt[nid] = m

        if nf == 0 or (max_depth >= 0 and depth >= max_depth) or m < min_split \
                or m < 2 * min_leaf or ymin == ymax:
            continue

        for a in range(nf):
            perm[a] = a
        n_cand = nf
        if max_features < nf:
            for i in range(max_features):
                k = np.random.randint(i, nf)
                tmp = perm[i]
                perm[i] = perm[k]
                perm[k] = tmp
            n_cand = max_features
            perm[:n_cand] = np.sort(perm[:n_cand])

        best = np.inf
        best_a = -1
        best_thr = 0.0
        for ci in range(n_cand):
            a = perm[ci]
            sum_l = 0.0
            sq_l = 0.0
            for k in range(s, e - 1):
                pos = P[a, k]
                v = yl[pos] - mean
                sum_l += v
                sq_l += v * v
                x0 = V[a, k]
                x1 = V[a, k + 1]
                if x0 == x1:
                    continue
                nl = k - s + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                sum_r = csum - sum_l
                sq_r = sse - sq_l
                cur = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr)
                if cur < best:
                    best = cur
                    best_a = a
                    best_thr = _midpoint(x0, x1)
        if best_a < 0 or not (best < sse - rel_tol * sse):
            continue

        j = features[best_a]
        feat[nid] = j
        thr[nid] = best_thr
        n_left = 0
        for k in range(s, e):
            gl = V[best_a, k] <= best_thr
            goes_left[P[best_a, k]] = gl
            if gl:
                n_left += 1
        for a in range(nf):
            li = s
            ri = 0
            for k in range(s, e):
                pos = P[a, k]
                if goes_left[pos]:
                    P[a, li] = pos
                    V[a, li] = V[a, k]
                    li += 1
                else:
                    buf[ri] = pos
                    vbuf[ri] = V[a, k]
                    ri += 1
            for k in range(ri):
                P[a, li + k] = buf[k]
                V[a, li + k] = vbuf[k]

        # right pushed first so the left subtree gets the next preorder ids
        st_s[sp] = s + n_left
        st_e[sp] = e
        st_d[sp] = depth + 1
        st_p[sp] = nid
        st_side[sp] = 1
        sp += 1
        st_s[sp] = s
        st_e[sp] = s + n_left
        st_d[sp] = depth + 1
        st_p[sp] = nid
        st_side[sp] = 0
        sp += 1

    return (feat[:node_count].copy(), thr[:node_count].copy(), left[:node_count].copy(),
            right[:node_count].copy(), val[:node_count].copy(), cnt[:node_count].copy())


@numba.njit(cache=True)
def _predict_kernel(X, feat, thr, left, right, val):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = val[node]
    return out


@numba.njit(cache=True)
def _apply_kernel(X, feat, thr, left, right):
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@dataclass
class Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if not self.is_leaf(node):
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def node(self, i: int) -> TreeNode:
        leaf = self.is_leaf(i)
        return TreeNode(i, "leaf" if leaf else "internal", int(self.feature[i]),
                        float(self.threshold[i]), float(self.value[i]), int(self.count[i]),
                        int(self.left[i]), int(self.right[i]))

    def nodes(self) -> Iterator[TreeNode]:
        """Depth-first (preorder) traversal."""
        stack = [0]
        while stack:
            i = stack.pop()
            yield self.node(i)
            if not self.is_leaf(i):
                stack.append(int(self.right[i]))
                stack.append(int(self.left[i]))

    def predict(self, X) -> np.ndarray:
        X = _as_float_matrix(X, self.n_features)
        return _predict_kernel(X, self.feature, self.threshold, self.left, self.right,
                               self.value)

    def apply(self, X) -> np.ndarray:
        X = _as_float_matrix(X, self.n_features)
        return _apply_kernel(X, self.feature, self.threshold, self.left, self.right)

    def dump(self) -> str:
        """Versioned text dump, one node per line in preorder.

        Fields: ``id kind feature threshold_or_value count``. Floats use
        ``repr`` so :meth:`load` round-trips exactly.
        """
        lines = [f"{DUMP_HEADER} n_features={self.n_features}"]
        for nd in self.nodes():
            if nd.kind == "leaf":
                lines.append(f"{nd.id} leaf -1 {nd.value!r} {nd.count}")
            else:
                lines.append(f"{nd.id} internal {nd.feature} {nd.threshold!r} {nd.count}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "Tree":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or not lines[0].startswith(DUMP_HEADER):
            raise ValueError("not a tree dump (bad header)")
        n_features = int(lines[0].split("n_features=")[1])
        recs = [l.split() for l in lines[1:]]
        n = len(recs)
        feat = np.full(n, -1, dtype=np.int64)
        thr = np.zeros(n)
        val = np.zeros(n)
        cnt = np.zeros(n, dtype=np.int64)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        kinds = {}
        for r in recs:
            i = int(r[0])
            kinds[i] = r[1]
            cnt[i] = int(r[4])
            if r[1] == "leaf":
                val[i] = float(r[3])
            else:
                feat[i] = int(r[2])
                thr[i] = float(r[3])
        # rebuild child links from the preorder sequence
        order = [int(r[0]) for r in recs]
        stack: list[list[int]] = []
        for i in order:
            if stack:
                parent = stack[-1]
                if left[parent[0]] < 0:
                    left[parent[0]] = i
                else:
                    right[parent[0]] = i
                    stack.pop()
            if kinds[i] == "internal":
                stack.append([i])
        # leaf values of internal nodes are not dumped; restore them as child-weighted means
        for i in reversed(order):
            if kinds[i] == "internal":
                l, r_ = left[i], right[i]
                val[i] = (val[l] * cnt[l] + val[r_] * cnt[r_]) / max(cnt[l] + cnt[r_], 1)
        return cls(feat, thr, left, right, val, cnt, n_features)


def _as_float_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    if n_features is not None and X.shape[1] < n_features:
        raise ValueError(f"expected at least {n_features} features, got {X.shape[1]}")
    return X


def _sort_orders(X) -> np.ndarray:
    """Row ids sorted by each feature (stable), shape (n_features, n_rows)."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


def _grow(X, y, rows, order, features, cfg: TreeConfig, seed: int) -> Tree:
    rows = np.sort(np.asarray(rows, dtype=np.int64))
    features = np.asarray(features, dtype=np.int64)
    max_depth = -1 if cfg.max_depth is None else int(cfg.max_depth)
    m = cfg.n_split_features(features.size) if features.size else 0
    out = _grow_kernel(X, y, rows, order, features, max_depth, int(cfg.min_samples_split),
                       int(cfg.min_samples_leaf), m, int(seed) % (2 ** 32), SPLIT_REL_TOL)
    return Tree(*out, n_features=X.shape[1])


def _sse(v) -> float:
    v = np.asarray(v, dtype=np.float64)
    return float(np.sum((v - v.mean()) ** 2)) if v.size else 0.0


def best_split(X, y, candidate_features: Sequence[int] | None = None,
               min_samples_leaf: int = 1):
    """Exact SSE-minimising split ``(j, s, sse_after)``, or ``None``.

    Candidate points are midpoints between consecutive distinct values.
    Ties go to the lowest feature index, then the lowest split point.
    """
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("best_split on empty input")
    if X.shape[0] != y.size:
        raise ValueError("X and y lengths differ")
    feats = (np.arange(X.shape[1]) if candidate_features is None
             else np.sort(np.asarray(candidate_features, dtype=np.int64)))
    if feats.size == 0:
        raise ValueError("need at least one candidate feature")
    if X.shape[0] < 2:
        return None
    cfg = TreeConfig(max_depth=1, min_samples_leaf=min_samples_leaf)
    tree = _grow(X, y, np.arange(X.shape[0]), _sort_orders(X), feats, cfg, 0)
    if tree.is_leaf(0):
        return None
    j, s = int(tree.feature[0]), float(tree.threshold[0])
    mask = X[:, j] <= s
    return j, s, _sse(y[mask]) + _sse(y[~mask])


def grow_tree(X, y, cfg: TreeConfig | None = None, seed: int = 0,
              features: Sequence[int] | None = None) -> Tree:
    """Greedy recursive growth; leaves hold the mean target of their region."""
    cfg = cfg or TreeConfig()
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("grow_tree needs at least one sample")
    feats = np.arange(X.shape[1]) if features is None else np.sort(np.asarray(features))
    tree = _grow(X, y, np.arange(X.shape[0]), _sort_orders(X), feats, cfg, seed)
    if cfg.prune_alpha is not None:
        tree = prune(tree, cfg.prune_alpha, X, y)
    return tree


def predict_tree(tree: Tree, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return float(tree.predict(x[None, :])[0])
    return tree.predict(x)


# -- pruning -------------------------------------------------------------

def _node_samples(tree: Tree, X, y):
    """Per node: count, mean and SSE of the samples routed through it."""
    members: list[np.ndarray] = [None] * tree.n_nodes  # type: ignore[list-item]
    members[0] = np.arange(X.shape[0])
    for nd in tree.nodes():
        if nd.kind == "internal":
            idx = members[nd.id]
            go = X[idx, nd.feature] <= nd.threshold
            members[nd.left] = idx[go]
            members[nd.right] = idx[~go]
    counts = np.array([m.size for m in members])
    means = np.array([y[m].mean() if m.size else tree.value[i]
                      for i, m in enumerate(members)])
    sses = np.array([_sse(y[m]) for m in members])
    return counts, means, sses


def cost_complexity(tree: Tree, alpha: float, X, y) -> float:
    """``SSE + alpha * n_leaves`` of a tree on the given samples."""
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    return float(np.sum((y - tree.predict(X)) ** 2) + alpha * tree.n_leaves)


def prune(tree: Tree, alpha: float, X, y) -> Tree:
    """Weakest-link pruning against ``C_alpha = SSE + alpha * |leaves|``.

    The internal node with the smallest SSE increase per removed leaf is
    collapsed while that increase is below ``alpha``.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if alpha == 0:
        return Tree(*(a.copy() for a in (tree.feature, tree.threshold, tree.left,
                                         tree.right, tree.value, tree.count)),
                    n_features=tree.n_features)
    counts, means, sses = _node_samples(tree, X, y)
    collapsed = np.zeros(tree.n_nodes, dtype=bool)

    def subtree_stats(i):
        if tree.is_leaf(i) or collapsed[i]:
            return sses[i], 1
        a, la = subtree_stats(tree.left[i])
        b, lb = subtree_stats(tree.right[i])
        return a + b, la + lb

    while True:
        best_g, best_node = np.inf, -1
        stack = [0]
        while stack:
            i = stack.pop()
            if tree.is_leaf(i) or collapsed[i]:
                continue
            r_sub, leaves = subtree_stats(i)
            g = (sses[i] - r_sub) / (leaves - 1)
            if g < best_g or (g == best_g and i < best_node):
                best_g, best_node = g, i
            stack.append(int(tree.left[i]))
            stack.append(int(tree.right[i]))
        if best_node < 0 or not best_g < alpha:
            break
        collapsed[best_node] = True

    # rebuild compact preorder arrays
    feat, thr, left, right, val, cnt = [], [], [], [], [], []

    def build(i):
        nid = len(feat)
        leaf = tree.is_leaf(i) or collapsed[i]
        feat.append(-1 if leaf else int(tree.feature[i]))
        thr.append(0.0 if leaf else float(tree.threshold[i]))
        left.append(-1)
        right.append(-1)
        val.append(float(means[i]))
        cnt.append(int(counts[i]))
        if not leaf:
            left[nid] = build(tree.left[i])
            right[nid] = build(tree.right[i])
        return nid

    build(0)
    return Tree(np.array(feat, dtype=np.int64), np.array(thr), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(val), np.array(cnt, dtype=np.int64),
                tree.n_features)


# -- forests -----------------------------------------------------------------

@dataclass
class Forest:
    trees: list[Tree]
    bootstrap_size: int
    seed: int

    def __post_init__(self):
        if len(self.trees) < 1:
            raise ValueError("a forest needs at least one tree")


def fit_random_forest(X, y, cfg: TreeConfig | None = None, n_trees: int = 200,
                      seed: int = 0, bootstrap: bool = True) -> Forest:
    """``n_trees`` trees, each on a seeded bootstrap of ``len(X)`` rows drawn with replacement."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    cfg = cfg or TreeConfig()
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    order = _sort_orders(X)
    feats = np.arange(X.shape[1])
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(_grow(X, y, rows, order, feats, cfg, int(rng.integers(2 ** 31))))
    return Forest(trees, n, seed)


def predict_forest(forest: Forest, X) -> np.ndarray:
    X = _as_float_matrix(X)
    return np.mean([t.predict(X) for t in forest.trees], axis=0)


@dataclass
class BoostModel:
    base_score: float
    trees: list[Tree]
    shrinkage: float
    row_subsample: float = 1.0
    col_subsample: float = 1.0

    @property
    def rounds(self) -> int:
        return len(self.trees)


def fit_gbt(X, y, cfg: TreeConfig | None = None, rounds: int = 100, shrinkage: float = 0.1,
            seed: int = 0, row_subsample: float = 1.0, col_subsample: float = 1.0,
            callback=None) -> BoostModel:
    """Squared-loss boosting: each round fits a tree to ``y - f_{n-1}(x)``.

    Rows are subsampled without replacement per round and columns per tree.
    ``callback(round, f_train)`` is called after every round.
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if not 0 < shrinkage <= 1:
        raise ValueError("shrinkage must lie in (0, 1]")
    if not (0 < row_subsample <= 1 and 0 < col_subsample <= 1):
        raise ValueError("subsample fractions must lie in (0, 1]")
    cfg = cfg or TreeConfig(max_depth=3)
    X = _as_float_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    order = _sort_orders(X)
    base = float(np.mean(y))
    f = np.full(n, base)
    rng = np.random.default_rng(seed)
    n_rows = max(1, int(round(row_subsample * n)))
    n_cols = max(1, int(round(col_subsample * p)))
    trees = []
    for k in range(rounds):
        rows = (np.sort(rng.choice(n, size=n_rows, replace=False)) if n_rows < n
                else np.arange(n))
        cols = (np.sort(rng.choice(p, size=n_cols, replace=False)) if n_cols < p
                else np.arange(p))
        residual = y - f
        tree = _grow(X, residual, rows, order, cols, cfg, int(rng.integers(2 ** 31)))
        f = f + shrinkage * tree.predict(X)
        trees.append(tree)
        if callback is not None:
            callback(k, f)
    return BoostModel(base, trees, shrinkage, row_subsample, col_subsample)


def predict_gbt(model: BoostModel, X) -> np.ndarray:
    X = _as_float_matrix(X)
    out = np.full(X.shape[0], model.base_score)
    for t in model.trees:
        out = out + model.shrinkage * t.predict(X)
    return out


# -- estimators --------------------------------------------------------------

class CARTRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, max_depth=None, min_samples_split=2, min_samples_leaf=1,
                 max_features=None, ccp_alpha=None, random_state=0):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.ccp_alpha = ccp_alpha
        self.random_state = random_state

    def _config(self) -> TreeConfig:
        return TreeConfig(self.max_depth, self.min_samples_split, self.min_samples_leaf,
                          "all" if self.max_features is None else self.max_features,
                          self.ccp_alpha)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.tree_ = grow_tree(X, y, self._config(), seed=self.random_state)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "tree_")
        return self.tree_.predict(check_array(X, dtype=np.float64))


class RandomForestRegressor(RegressorMixin, BaseEstimator):
    """Defaults follow the benchmark configuration (200 trees, depth 35)."""

    def __init__(self, n_estimators=200, max_depth=35, min_samples_split=2,
                 min_samples_leaf=1, max_features=None, bootstrap=True, random_state=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        cfg = TreeConfig(self.max_depth, self.min_samples_split, self.min_samples_leaf,
                         "all" if self.max_features is None else self.max_features)
        self.forest_ = fit_random_forest(X, y, cfg, self.n_estimators, self.random_state,
                                         self.bootstrap)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "forest_")
        return predict_forest(self.forest_, check_array(X, dtype=np.float64))


class GBTRegressor(RegressorMixin, BaseEstimator):
    """Defaults follow the benchmark configuration (3000 rounds, eta 0.02, depth 10)."""

    def __init__(self, n_rounds=3000, learning_rate=0.02, max_depth=10, subsample=0.7,
                 colsample_bytree=0.7, min_samples_leaf=1, random_state=0):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.subsample = subsample
        self.colsample_bytree = colsample_bytree
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        cfg = TreeConfig(max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf)
        self.model_ = fit_gbt(X, y, cfg, self.n_rounds, self.learning_rate, self.random_state,
                              self.subsample, self.colsample_bytree)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return predict_gbt(self.model_, check_array(X, dtype=np.float64))
