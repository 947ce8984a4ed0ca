"""Kernels, median-heuristic bandwidth and the unbiased MMD^2 two-sample statistic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import pdist

from .core import DataError, as_samples, make_rng

RBF = "rbf"
MATERN25 = "matern25"
FAMILIES = (RBF, MATERN25)
MEDIAN = "median"

# exact median below this many pooled points, seeded subsample above
MEDIAN_MAX_POINTS = 4096
# pooled size up to which the permutation test caches the full Gram matrix
PERM_GRAM_LIMIT = 6000
# Gram sums are accumulated over cache-sized tiles
_ROWS = 128
_COLS = 1024
_SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class KernelSpec:
    family: str = RBF
    bandwidth: float | str = MEDIAN

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.bandwidth != MEDIAN:
            bw = float(self.bandwidth)
            if not np.isfinite(bw) or bw <= 0:
                raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
            object.__setattr__(self, "bandwidth", bw)

    def with_bandwidth(self, bw: float) -> "KernelSpec":
        return KernelSpec(self.family, bw)


@dataclass(frozen=True)
class MmdResult:
    mmd2: float
    bandwidth_used: float
    n_x: int
    n_y: int


def _apply_profile(family: str, sq_dist: np.ndarray, sigma: float) -> np.ndarray:
    """Kernel values from squared distances, in place."""
    if family == RBF:
        sq_dist *= -0.5 / sigma**2
        return np.exp(sq_dist, out=sq_dist)
    r = np.sqrt(sq_dist, out=sq_dist)
    r *= _SQRT5 / sigma  # r now holds sqrt(5) * dist / sigma
    decay = np.exp(-r)
    poly = r * r
    poly *= 1.0 / 3.0
    poly += r
    poly += 1.0
    poly *= decay
    return poly


def _sq_dists(A: np.ndarray, B: np.ndarray, a_norm=None, b_norm=None) -> np.ndarray:
    a_norm = (A * A).sum(1) if a_norm is None else a_norm
    b_norm = (B * B).sum(1) if b_norm is None else b_norm
    d2 = A @ B.T
    d2 *= -2.0
    d2 += a_norm[:, None]
    d2 += b_norm[None, :]
    return np.maximum(d2, 0.0, out=d2)


def kernel_matrix(family: str, sigma: float, A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    return _apply_profile(family, _sq_dists(A, B), sigma)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """k(x, y) for a spec with an explicit bandwidth."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DataError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.bandwidth == MEDIAN:
        raise ValueError("kernel_eval needs an explicit bandwidth")
    d2 = np.array([float(np.sum((x - y) ** 2))])
    return float(_apply_profile(spec.family, d2, spec.bandwidth)[0])


def median_heuristic_bandwidth(pool, rng=None, max_points: int = MEDIAN_MAX_POINTS) -> float:
    """Median pairwise Euclidean distance over distinct index pairs of ``pool``.

    Pools larger than ``max_points`` are first sorted lexicographically (so
    the result does not depend on row order) and uniformly subsampled with
    ``rng`` (default: a fixed seed of 0). A zero median falls back to the
    smallest nonzero distance.
    """
    pool = as_samples(pool, "pool")
    if pool.shape[0] < 2:
        raise DataError("median heuristic needs at least 2 samples")
    if pool.shape[0] > max_points:
        pool = pool[np.lexsort(pool.T[::-1])]
        idx = np.sort(make_rng(0 if rng is None else rng).choice(pool.shape[0], max_points, replace=False))
        pool = pool[idx]
    d = pdist(pool)
    med = float(np.median(d))
    if med > 0:
        return med
    nz = d[d > 0]
    if nz.size == 0:
        raise DataError("degenerate pool: all points coincide")
    return float(nz.min())


def resolve_bandwidth(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> float:
    if spec.bandwidth == MEDIAN:
        return median_heuristic_bandwidth(np.vstack([X, Y]))
    return float(spec.bandwidth)


def _within_sum(family: str, sigma: float, A: np.ndarray) -> float:
    """Sum of k(a_i, a_j) over i != j, visiting each unordered pair once."""
    norms = (A * A).sum(1)
    n = A.shape[0]
    total = 0.0
    for s in range(0, n, _ROWS):
        e = min(s + _ROWS, n)
        for c in range(s, n, _COLS):
            K = _apply_profile(family, _sq_dists(A[s:e], A[c : c + _COLS], norms[s:e], norms[c : c + _COLS]), sigma)
            # only the first column tile of a row band can reach the diagonal
            total += np.triu(K, 1).sum() if c == s else K.sum()
    return 2.0 * total


def _cross_sum(family: str, sigma: float, A: np.ndarray, B: np.ndarray) -> float:
    a_norm, b_norm = (A * A).sum(1), (B * B).sum(1)
    total = 0.0
    for s in range(0, A.shape[0], _ROWS):
        for c in range(0, B.shape[0], _COLS):
            d2 = _sq_dists(A[s : s + _ROWS], B[c : c + _COLS], a_norm[s : s + _ROWS], b_norm[c : c + _COLS])
            total += _apply_profile(family, d2, sigma).sum()
    return total


def _check_pair(X, Y):
    X = as_samples(X, "X")
    Y = as_samples(Y, "Y")
    if X.shape[0] < 2 or Y.shape[0] < 2:
        raise DataError(f"MMD needs at least 2 samples per set, got {X.shape[0]} and {Y.shape[0]}")
    if X.shape[1] != Y.shape[1]:
        raise DataError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return X, Y


def mmd2_unbiased(
    X, Y, spec: KernelSpec = KernelSpec(), kernel: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
) -> MmdResult:
    """Unbiased estimate of the squared MMD between samples X and Y.

    ``kernel`` optionally overrides the spec with a callable returning the
    Gram matrix of two sample sets (the bandwidth is then reported as 1).
    The estimate may be negative and is not clamped.
    """
    X, Y = _check_pair(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if kernel is not None:
        Kxx, Kyy, Kxy = kernel(X, X), kernel(Y, Y), kernel(X, Y)
        sxx = Kxx.sum() - np.trace(Kxx)
        syy = Kyy.sum() - np.trace(Kyy)
        sxy = Kxy.sum()
        sigma = 1.0
    else:
        sigma = resolve_bandwidth(spec, X, Y)
        sxx = _within_sum(spec.family, sigma, X)
        syy = _within_sum(spec.family, sigma, Y)
        sxy = _cross_sum(spec.family, sigma, X, Y)
    mmd2 = sxx / (n * (n - 1)) + syy / (m * (m - 1)) - 2.0 * sxy / (n * m)
    return MmdResult(float(mmd2), float(sigma), n, m)


def _mmd2_from_gram(K: np.ndarray, idx_x: np.ndarray, idx_y: np.ndarray) -> float:
    n, m = len(idx_x), len(idx_y)
    Kxx = K[np.ix_(idx_x, idx_x)]
    Kyy = K[np.ix_(idx_y, idx_y)]
    sxx = Kxx.sum() - np.trace(Kxx)
    syy = Kyy.sum() - np.trace(Kyy)
    sxy = K[np.ix_(idx_x, idx_y)].sum()
    return sxx / (n * (n - 1)) + syy / (m * (m - 1)) - 2.0 * sxy / (n * m)


def mmd_permutation_pvalue(X, Y, spec: KernelSpec, n_permutations: int, rng) -> float:
    """Permutation p-value (1 + #{permuted >= observed}) / (1 + n_permutations).

    The bandwidth is resolved once on the pooled sample, which is invariant
    under relabelling.
    """
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    X, Y = _check_pair(X, Y)
    rng = make_rng(rng)
    n = X.shape[0]
    Z = np.vstack([X, Y])
    sigma = resolve_bandwidth(spec, X, Y)
    fixed = spec.with_bandwidth(sigma)
    N = Z.shape[0]
    K = kernel_matrix(spec.family, sigma, Z, Z) if N <= PERM_GRAM_LIMIT else None

    def stat(perm: np.ndarray) -> float:
        if K is not None:
            return _mmd2_from_gram(K, perm[:n], perm[n:])
        return mmd2_unbiased(Z[perm[:n]], Z[perm[n:]], fixed).mmd2

    observed = stat(np.arange(N))
    exceed = 0
    for _ in range(n_permutations):
        if stat(rng.permutation(N)) >= observed:
            exceed += 1
    return (1 + exceed) / (1 + n_permutations)
