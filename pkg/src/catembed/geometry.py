"""Embedding-space analysis.

The category metric averages ``|f(p, rest) - f(q, rest)|`` over one shared
set of complement rows, so symmetry and the triangle inequality are
inherited pointwise from the absolute difference.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .numerics import NormalityReport, dagostino_k2, gaussian_fit, jacobi_eigh, pca

log = logging.getLogger(__name__)

DEFAULT_SCHOENBERG_LAMBDAS = (0.1, 1.0, 10.0)


@dataclass
class CategoryMetric:
    feature: int
    distances: np.ndarray  # (m, m)
    n_complement: int
    seed: int
    labels: tuple | None = None

    @property
    def cardinality(self) -> int:
        return self.distances.shape[0]


def estimate_metric(f: Callable[[np.ndarray], np.ndarray], X, feature: int,
                    cardinality: int, n_complement: int = 1000, seed: int = 0,
                    chunk_rows: int = 200_000) -> CategoryMetric:
    """Shared-sample estimate of the category metric of one feature.

    ``f`` maps integer code rows to model outputs. ``n_complement`` rows are
    drawn from ``X`` (without replacement when possible); every category is
    substituted into the same rows.
    """
    X = np.asarray(X, dtype=np.int64)
    if cardinality < 2:
        raise ValueError("the metric needs a feature with at least 2 categories")
    if n_complement < 1:
        raise ValueError("n_complement must be >= 1")
    rng = np.random.default_rng(seed)
    replace = n_complement > X.shape[0]
    comp = X[rng.choice(X.shape[0], size=n_complement, replace=replace)]
    k = comp.shape[0]
    outputs = np.empty((cardinality, k))
    per_chunk = max(1, chunk_rows // k)
    for start in range(0, cardinality, per_chunk):
        cats = np.arange(start, min(start + per_chunk, cardinality))
        block = np.repeat(comp[None, :, :], cats.size, axis=0)
        block[:, :, feature] = cats[:, None]
        outputs[cats] = np.asarray(f(block.reshape(-1, X.shape[1]))).reshape(cats.size, k)
    d = np.zeros((cardinality, cardinality))
    for p in range(cardinality - 1):
        row = np.abs(outputs[p] - outputs[p + 1:]).mean(axis=1)
        d[p, p + 1:] = row
        d[p + 1:, p] = row
    return CategoryMetric(feature, d, k, seed)


def merge_indiscernible(metric: CategoryMetric, tol: float = 0.0):
    """Collapse categories closer than ``tol`` (union-find over close pairs).

    Returns the merged metric (restricted to the lowest index of each group)
    and ``merge_map`` with the new index of every old category.
    """
    d = metric.distances
    m = d.shape[0]
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p, q in zip(*np.nonzero(np.triu(d <= tol, 1))):
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[max(rp, rq)] = min(rp, rq)
    roots = np.array([find(a) for a in range(m)])
    reps = np.unique(roots)
    new_index = {r: i for i, r in enumerate(reps)}
    merge_map = np.array([new_index[r] for r in roots])
    labels = None if metric.labels is None else tuple(metric.labels[r] for r in reps)
    merged = CategoryMetric(metric.feature, d[np.ix_(reps, reps)].copy(),
                            metric.n_complement, metric.seed, labels)
    return merged, merge_map


@dataclass
class SchoenbergCheck:
    lam: float
    kernel: np.ndarray
    min_eigenvalue: float
    is_positive_definite: bool


def schoenberg_check(metric, lam: float = 1.0) -> SchoenbergCheck:
    """Positive-definiteness of ``exp(-lam * d)``.

    Positive definite means the smallest eigenvalue exceeds ``1e-10 * m``.
    Accepts a :class:`CategoryMetric` or a raw distance matrix.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    d = metric.distances if isinstance(metric, CategoryMetric) else np.asarray(metric, float)
    kernel = np.exp(-lam * d)
    w, _ = jacobi_eigh(kernel)
    lo = float(w[0])
    return SchoenbergCheck(lam, kernel, lo, lo > 1e-10 * d.shape[0])


def schoenberg_sweep(metric, lams: Sequence[float] = DEFAULT_SCHOENBERG_LAMBDAS):
    return [schoenberg_check(metric, lam) for lam in lams]


def embedding_metric_scatter(weights, metric, pairs: int = 10_000, seed: int = 0):
    """Euclidean embedding distance vs metric distance for random distinct pairs.

    Returns an array with columns ``(p, q, emb_dist, metric_dist)``.
    """
    w = np.asarray(weights, dtype=np.float64)
    d = metric.distances if isinstance(metric, CategoryMetric) else np.asarray(metric, float)
    m = w.shape[0]
    if d.shape != (m, m):
        raise ValueError(f"embedding has {m} rows but the metric is {d.shape}")
    iu, ju = np.triu_indices(m, 1)
    total = iu.size
    if pairs > total:
        warnings.warn(f"requested {pairs} pairs, only {total} distinct pairs exist; clipping",
                      stacklevel=2)
        pairs = total
    rng = np.random.default_rng(seed)
    pick = rng.choice(total, size=pairs, replace=False)
    p, q = iu[pick], ju[pick]
    emb = np.sqrt(np.sum((w[p] - w[q]) ** 2, axis=1))
    return np.column_stack([p, q, emb, d[p, q]])


# -- t-SNE ------------------------------------------------------------------

@dataclass
class TsneConfig:
    perplexity: float | None = None  # None: 3 below 16 points, else min(30, (n-2)//3)
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    min_gain: float = 0.01
    seed: int = 0
    record_every: int = 1
    restart: bool = True  # reject KL-increasing steps once exaggeration is over

    def resolve_perplexity(self, n: int) -> float:
        if self.perplexity is not None:
            return float(self.perplexity)
        if n < 16:
            return 3.0
        return float(min(30, (n - 2) // 3))


def _sq_dists(Y):
    s = np.sum(Y * Y, axis=1)
    d = s[:, None] + s[None, :] - 2.0 * (Y @ Y.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _conditional_p(D, perplexity, tol=1e-5, max_steps=200):
    """Row-wise Gaussian affinities whose entropy matches ``log(perplexity)``."""
    n = D.shape[0]
    P = np.zeros((n, n))
    target = np.log(perplexity)
    for i in range(n):
        d = np.delete(D[i], i)
        beta, lo, hi = 1.0, -np.inf, np.inf
        for _ in range(max_steps):
            p = np.exp(-(d - d.min()) * beta)
            sp = p.sum()
            h = np.log(sp) + beta * np.sum((d - d.min()) * p) / sp
            diff = h - target
            if abs(diff) < tol:
                break
            if diff > 0:
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = beta / 2 if lo == -np.inf else (beta + lo) / 2
        P[i, np.arange(n) != i] = p / sp
    return P


def _student_q(Y):
    num = 1.0 / (1.0 + _sq_dists(Y))
    np.fill_diagonal(num, 0.0)
    return num, np.maximum(num / num.sum(), 1e-12)


def _kl(P, Q):
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne(points, cfg: TsneConfig | None = None, return_kl: bool = False):
    """Exact t-SNE to two dimensions.

    With ``return_kl=True`` also returns ``[(iteration, kl), ...]`` recorded
    every ``cfg.record_every`` iterations (against the unexaggerated
    affinities).

    After the exaggeration phase a step that would raise the divergence is
    rejected: velocity and gains are cleared and a plain gradient step is
    halved until it does not increase the divergence (momentum restart).
    """
    cfg = cfg or TsneConfig()
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if n < 4:
        raise ValueError("t-SNE needs at least 4 points")
    perp = cfg.resolve_perplexity(n)
    if not 0 < perp < (n - 1) / 3:
        raise ValueError(f"perplexity {perp} too large for {n} points (need < {(n - 1) / 3:.3g})")
    P = _conditional_p(_sq_dists(X), perp)
    P = P + P.T
    P = np.maximum(P / P.sum(), 1e-12)
    rng = np.random.default_rng(cfg.seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = []
    num, Q = _student_q(Y)
    kl = _kl(P, Q)
    for it in range(cfg.iterations):
        exaggerate = it < cfg.exaggeration_iters
        if it == cfg.exaggeration_iters:
            update[:] = 0.0
            gains[:] = 1.0
        if return_kl and it % cfg.record_every == 0:
            trace.append((it, kl))
        Pe = P * cfg.early_exaggeration if exaggerate else P
        W = (Pe - Q) * num
        grad = 4.0 * (np.diag(W.sum(axis=1)) - W) @ Y
        momentum = cfg.momentum_initial if exaggerate else cfg.momentum_final
        same = (grad > 0) == (update > 0)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, cfg.min_gain, out=gains)
        update = momentum * update - cfg.learning_rate * gains * grad
        Y_new = Y + update
        Y_new -= Y_new.mean(axis=0)
        num_new, Q_new = _student_q(Y_new)
        kl_new = _kl(P, Q_new)
        if cfg.restart and not exaggerate and kl_new > kl:
            # reject, drop the accumulated velocity and backtrack a plain step
            update[:] = 0.0
            gains[:] = 1.0
            step = cfg.learning_rate
            for _ in range(60):
                Y_new = Y - step * grad
                Y_new -= Y_new.mean(axis=0)
                num_new, Q_new = _student_q(Y_new)
                kl_new = _kl(P, Q_new)
                if kl_new <= kl:
                    break
                step *= 0.5
            else:
                Y_new, num_new, Q_new, kl_new = Y, num, Q, kl
        Y, num, Q, kl = Y_new, num_new, Q_new, kl_new
    if return_kl:
        trace.append((cfg.iterations, kl))
        return Y, trace
    return Y


def nearest_neighbor_purity(Y, labels) -> float:
    """Share of points whose nearest neighbour carries the same label."""
    D = _sq_dists(np.asarray(Y, dtype=np.float64))
    np.fill_diagonal(D, np.inf)
    labels = np.asarray(labels)
    return float(np.mean(labels[np.argmin(D, axis=1)] == labels))


# -- distributions along directions -------------------------------------------

def sales_along_direction(weights, direction, per_category_mean_sales):
    """Per-category ``(category, projection, mean_sales)`` sorted by projection."""
    w = np.asarray(weights, dtype=np.float64)
    u = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    proj = w @ (u / norm)
    sales = np.asarray(per_category_mean_sales, dtype=np.float64)
    order = np.argsort(proj, kind="stable")
    return np.column_stack([order, proj[order], sales[order]])


@dataclass
class ComponentDensity:
    component: int
    projections: np.ndarray
    bin_edges: np.ndarray
    bin_mass: np.ndarray
    mu: float
    sigma: float
    normality: NormalityReport | None


def pc_density_report(weights, top_k: int = 4, bins: int = 30) -> list[ComponentDensity]:
    """Histogram, normal fit and K^2 test along each of the first ``top_k`` components."""
    w = np.asarray(weights, dtype=np.float64)
    if top_k > w.shape[1]:
        raise ValueError(f"top_k={top_k} exceeds embedding dimension {w.shape[1]}")
    res = pca(w)
    scores = res.project(w, top_k)
    out = []
    for c in range(top_k):
        x = scores[:, c]
        counts, edges = np.histogram(x, bins=bins)
        mu, sigma = gaussian_fit(x)
        try:
            normality = dagostino_k2(x)
        except ValueError:
            normality = None
        out.append(ComponentDensity(c, x, edges, counts / x.size, mu, sigma, normality))
    return out


@dataclass
class CrossCorrelationReport:
    max_canonical: float
    pairs: dict = field(default_factory=dict)  # (a, b) -> {"canonical", "max_abs_pearson"}


def _orthonormal_basis(Z, rel_tol=1e-10):
    Zc = Z - Z.mean(axis=0)
    if Zc.size == 0:
        return Zc
    u, s, _ = np.linalg.svd(Zc, full_matrices=False)
    keep = s > rel_tol * max(s.max(initial=0.0), 1e-300)
    return u[:, keep]


def cross_subspace_correlation(embs: Sequence, X) -> CrossCorrelationReport:
    """Largest canonical correlation between the embedded coordinates of each feature pair."""
    if len(embs) < 2:
        raise ValueError("need at least two features")
    X = np.asarray(X, dtype=np.int64)
    blocks = [np.asarray(getattr(e, "weights", e))[X[:, i]] for i, e in enumerate(embs)]
    bases = [_orthonormal_basis(b) for b in blocks]
    report = CrossCorrelationReport(0.0)
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            if bases[a].shape[1] == 0 or bases[b].shape[1] == 0:
                canon = 0.0
            else:
                canon = float(min(np.linalg.svd(bases[a].T @ bases[b], compute_uv=False)[0], 1.0))
            za = blocks[a] - blocks[a].mean(axis=0)
            zb = blocks[b] - blocks[b].mean(axis=0)
            sa = np.sqrt(np.sum(za ** 2, axis=0))
            sb = np.sqrt(np.sum(zb ** 2, axis=0))
            with np.errstate(divide="ignore", invalid="ignore"):
                corr = (za.T @ zb) / np.outer(sa, sb)
            corr = np.nan_to_num(corr)
            entry = {"canonical": canon, "max_abs_pearson": float(np.max(np.abs(corr)))}
            report.pairs[(a, b)] = entry
            report.max_canonical = max(report.max_canonical, canon)
    return report


# -- plot data ---------------------------------------------------------------

def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in r])
    return path


def write_svg_scatter(path, x, y, labels=None, size: int = 480, title: str | None = None) -> Path:
    """Bare-bones SVG scatter plot; no styling guarantees."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pad = 20

    def scale(v):
        lo, hi = float(np.min(v)), float(np.max(v))
        span = hi - lo if hi > lo else 1.0
        return pad + (v - lo) / span * (size - 2 * pad)

    sx, sy = scale(x), size - scale(y)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    if title:
        parts.append(f'<text x="{pad}" y="14" font-size="12">{escape(title)}</text>')
    for i in range(x.size):
        parts.append(f'<circle cx="{sx[i]:.2f}" cy="{sy[i]:.2f}" r="2.5" fill="steelblue"/>')
        if labels is not None:
            parts.append(f'<text x="{sx[i] + 4:.2f}" y="{sy[i] - 4:.2f}" '
                         f'font-size="10">{escape(str(labels[i]))}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path
