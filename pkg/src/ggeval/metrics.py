"""Distribution-comparison metrics between two embedding matrices: Fréchet
distance, biased MMD, and kNN-manifold precision/recall/density/coverage."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist, pdist


def moments(X: np.ndarray):
    """Sample mean and unbiased covariance (divisor N-1), symmetrized."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows for moments")
    mu = X.mean(axis=0)
    C = np.cov(X, rowvar=False).reshape(X.shape[1], X.shape[1])
    return mu, (C + C.T) / 2.0


def matrix_sqrt_psd(A: np.ndarray) -> np.ndarray:
    """PSD square root by eigendecomposition; tiny/negative eigenvalues clamped."""
    A = np.asarray(A, dtype=np.float64)
    if np.max(np.abs(A - A.T)) > 1e-8:
        raise ValueError("matrix is not symmetric within 1e-8")
    w, V = np.linalg.eigh((A + A.T) / 2.0)
    cutoff = 1e-12 * max(1.0, float(w.max(initial=0.0)))
    w = np.where(w < cutoff, 0.0, w)
    return (V * np.sqrt(w)) @ V.T


def frechet_distance(R: np.ndarray, G: np.ndarray) -> float:
    """Gaussian-moment distance; the cross term uses the symmetric product
    C_r^{1/2} C_g C_r^{1/2} so only PSD square roots are needed."""
    R, G = np.asarray(R, dtype=np.float64), np.asarray(G, dtype=np.float64)
    if R.shape[1] != G.shape[1]:
        raise ValueError("embedding dimensions differ")
    mu_r, C_r = moments(R)
    mu_g, C_g = moments(G)
    sqrt_r = matrix_sqrt_psd(C_r)
    S = matrix_sqrt_psd(sqrt_r @ C_g @ sqrt_r)
    fd = float(np.sum((mu_r - mu_g) ** 2) + np.trace(C_r) + np.trace(C_g) - 2.0 * np.trace(S))
    return max(fd, 0.0)


def mmd(R: np.ndarray, G: np.ndarray, kernel: str = "linear", sigma: float | None = None) -> float:
    """Biased V-statistic MMD with diagonal terms included.

    kernel "linear": k(x, y) = x.y; kernel "rbf": k(x, y) = exp(-|x-y|^2 / (2 sigma^2)).
    """
    R, G = np.atleast_2d(np.asarray(R, dtype=np.float64)), np.atleast_2d(np.asarray(G, dtype=np.float64))
    if R.shape[1] != G.shape[1]:
        raise ValueError("embedding dimensions differ")
    if kernel == "linear":
        krr, kgg, krg = R @ R.T, G @ G.T, R @ G.T
    elif kernel == "rbf":
        if sigma is None or not (sigma > 0) or not np.isfinite(sigma):
            raise ValueError("rbf kernel needs a finite positive sigma")
        s2 = 2.0 * sigma * sigma
        krr = np.exp(-cdist(R, R, "sqeuclidean") / s2)
        kgg = np.exp(-cdist(G, G, "sqeuclidean") / s2)
        krg = np.exp(-cdist(R, G, "sqeuclidean") / s2)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    m, n = R.shape[0], G.shape[0]
    return float(krr.sum() / m**2 + kgg.sum() / n**2 - 2.0 * krg.sum() / (m * n))


def rbf_sigma(R: np.ndarray) -> float:
    """Median pairwise distance among the real embeddings; 1.0 when degenerate."""
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    if R.shape[0] < 2:
        raise ValueError("need at least 2 rows for the median heuristic")
    med = float(np.median(pdist(R)))
    return med if med > 0.0 else 1.0


def knn_radii(X: np.ndarray, k: int) -> np.ndarray:
    """Distance from each row to its k-th nearest neighbor, excluding itself."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    if not (1 <= k < n):
        raise ValueError(f"k={k} must satisfy 1 <= k < {n}")
    D = cdist(X, X)
    np.fill_diagonal(D, np.inf)
    return np.partition(D, k - 1, axis=1)[:, k - 1]


def precision_recall(R: np.ndarray, G: np.ndarray, k: int = 5):
    """Fraction of generated rows inside the union of closed real kNN balls,
    and symmetrically for real rows in generated balls."""
    R, G = np.atleast_2d(R), np.atleast_2d(G)
    r_radii = knn_radii(R, k)
    g_radii = knn_radii(G, k)
    D = cdist(R, G)
    precision = float(np.mean(np.any(D <= r_radii[:, None], axis=0)))
    recall = float(np.mean(np.any(D <= g_radii[None, :], axis=1)))
    return precision, recall


def density_coverage(R: np.ndarray, G: np.ndarray, k: int = 5):
    """Density counts ball memberships per generated row (may exceed 1);
    coverage is the fraction of real balls containing a generated row."""
    R, G = np.atleast_2d(R), np.atleast_2d(G)
    r_radii = knn_radii(R, k)
    D = cdist(R, G)
    inside = D <= r_radii[:, None]
    density = float(inside.sum()) / (k * G.shape[0])
    coverage = float(np.mean(np.any(inside, axis=1)))
    return density, coverage


def f1(a: float, b: float) -> float:
    """Harmonic mean, defined as 0 when both inputs are 0."""
    if a + b == 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)
