"""Dense linear algebra, seeded randomness, PCA and normality tests."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def seeded_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """PCG64 generator; ``stream`` derives an independent child stream."""
    key = [int(seed)] if stream is None else [int(seed), int(stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


@numba.njit(cache=True)
def _jacobi_kernel(A, tol, max_sweeps):
    n = A.shape[0]
    V = np.eye(n)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += A[i, j] * A[i, j]
    scale = np.sqrt(scale)
    thresh = tol * scale if scale > 0 else tol
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) <= thresh:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i]
    return w, V, sweeps


def _check_symmetric(a, tol=1e-9) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.size and np.max(np.abs(a - a.T)) > tol * max(1.0, np.max(np.abs(a))):
        raise ValueError("matrix is not symmetric")
    return a


def jacobi_eigh(a, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in ascending order and the matching eigenvectors as
    columns.
    """
    a = _check_symmetric(a)
    if a.shape[0] == 0:
        return np.empty(0), np.empty((0, 0))
    # work on the exactly symmetric part
    work = 0.5 * (a + a.T)
    w, v, _ = _jacobi_kernel(np.ascontiguousarray(work), tol, JACOBI_MAX_SWEEPS)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigenvalue(sym) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    w, _ = jacobi_eigh(sym)
    return float(w[0])


def min_eigenpair(sym) -> tuple[float, np.ndarray]:
    w, v = jacobi_eigh(sym)
    return float(w[0]), v[:, 0]


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray  # (n_features, n_features), columns in decreasing variance
    eigenvalues: np.ndarray
    mean: np.ndarray

    def project(self, data, n_components: int | None = None) -> np.ndarray:
        comps = self.components if n_components is None else self.components[:, :n_components]
        return (np.asarray(data, dtype=np.float64) - self.mean) @ comps

    def back_project(self, scores) -> np.ndarray:
        scores = np.asarray(scores, dtype=np.float64)
        k = scores.shape[1]
        return scores @ self.components[:, :k].T + self.mean


def pca(data) -> PcaResult:
    """Principal components from the eigendecomposition of the sample covariance.

    Component signs are fixed so that the largest-magnitude loading of every
    component is positive.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 1:
        raise ValueError("pca needs at least 2 rows and 1 column")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (data.shape[0] - 1)
    w, v = jacobi_eigh(cov)
    w, v = w[::-1], v[:, ::-1].copy()
    w = np.where(w < 0, 0.0, w)
    for j in range(v.shape[1]):
        k = np.argmax(np.abs(v[:, j]))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return PcaResult(v, w, mean)


class PCA(TransformerMixin, BaseEstimator):
    """Minimal PCA transformer over :func:`pca`."""

    def __init__(self, n_components=None):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.result_ = pca(X)
        k = X.shape[1] if self.n_components is None else self.n_components
        self.components_ = self.result_.components[:, :k].T
        self.explained_variance_ = self.result_.eigenvalues[:k]
        self.mean_ = self.result_.mean
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=np.float64)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, X):
        check_is_fitted(self, "result_")
        return np.asarray(X) @ self.components_ + self.mean_


@dataclass(frozen=True)
class NormalityReport:
    statistic: float
    p_value: float
    test: str

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value outside [0, 1]")


def chi2_sf(x: float, df: float) -> float:
    """Upper tail of the chi-square distribution."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def _skew_z(b2: float, n: int) -> float:
    y = b2 * np.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = (3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3)
             / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9)))
    w2 = -1 + np.sqrt(2 * (beta2 - 1))
    delta = 1 / np.sqrt(0.5 * np.log(w2))
    alpha = np.sqrt(2.0 / (w2 - 1))
    if y == 0:
        return 0.0
    return float(delta * np.log(y / alpha + np.sqrt((y / alpha) ** 2 + 1)))


def _kurtosis_z(b2: float, n: int) -> float:
    e = 3.0 * (n - 1) / (n + 1)
    varb2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1.0) ** 2 * (n + 3) * (n + 5))
    x = (b2 - e) / np.sqrt(varb2)
    sqrtbeta1 = (6.0 * (n * n - 5 * n + 2) / ((n + 7.0) * (n + 9))
                 * np.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2.0) * (n - 3))))
    a = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + np.sqrt(1 + 4.0 / sqrtbeta1 ** 2))
    term1 = 1 - 2 / (9.0 * a)
    denom = 1 + x * np.sqrt(2 / (a - 4.0))
    if denom == 0:
        return float("inf")
    term2 = np.sign(denom) * np.cbrt((1 - 2.0 / a) / abs(denom))
    return float((term1 - term2) / np.sqrt(2 / (9.0 * a)))


def dagostino_k2(samples) -> NormalityReport:
    """D'Agostino-Pearson omnibus test from transformed skewness and kurtosis."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < 20:
        raise ValueError("D'Agostino K^2 needs at least 20 samples")
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 <= 1e-300 or np.ptp(x) == 0:
        raise ValueError("constant input has no defined skewness or kurtosis")
    skew = np.mean(d ** 3) / m2 ** 1.5
    kurt = np.mean(d ** 4) / m2 ** 2
    k2 = _skew_z(skew, n) ** 2 + _kurtosis_z(kurt, n) ** 2
    return NormalityReport(float(k2), chi2_sf(k2, 2), "dagostino_k2")


def mardia(data) -> tuple[NormalityReport, NormalityReport]:
    """Mardia multivariate skewness and kurtosis tests.

    Skewness: ``n * b1 / 6`` against chi-square with ``p(p+1)(p+2)/6`` dof.
    Kurtosis: ``(b2 - p(p+2)) / sqrt(8p(p+2)/n)`` against a two-sided normal.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("mardia expects a 2-D matrix")
    n, p = x.shape
    if p < 2 or n <= p:
        raise ValueError("mardia needs rows > cols >= 2")
    d = x - x.mean(axis=0)
    s = d.T @ d / n
    w = np.linalg.eigvalsh(s)
    if w[0] <= 1e-12 * max(w[-1], 1e-300):
        raise ValueError(
            "covariance is singular; reduce the dimension (e.g. with pca) first"
        )
    g = d @ np.linalg.solve(s, d.T)
    b1 = float(np.sum(g ** 3)) / n ** 2
    b2 = float(np.sum(np.diag(g) ** 2)) / n
    skew_stat = n * b1 / 6.0
    dof = p * (p + 1) * (p + 2) / 6.0
    kurt_z = (b2 - p * (p + 2)) / np.sqrt(8.0 * p * (p + 2) / n)
    kurt_p = float(special.erfc(abs(kurt_z) / np.sqrt(2.0)))
    return (
        NormalityReport(skew_stat, chi2_sf(skew_stat, dof), "mardia_skew"),
        NormalityReport(float(kurt_z), min(kurt_p, 1.0), "mardia_kurtosis"),
    )


def gaussian_fit(samples) -> tuple[float, float]:
    """Maximum-likelihood normal fit ``(mu, sigma)``."""
    x = np.asarray(samples, dtype=np.float64)
    return float(x.mean()), float(x.std())
