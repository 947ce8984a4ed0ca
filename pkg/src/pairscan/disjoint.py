"""Disjointedness test and embedding-composition metrics.

Two perturbations are disjoint when the signed density shifts of the singles
add up to that of the double. Equivalently the mixtures
``(control + double) / 2`` and ``(single_i + single_j) / 2`` coincide, which
is checked with an MMD two-sample statistic on balanced pools.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import CONTROL, Condition, DataError, ExperimentDataset, Pair, canonical_pair, derive_rng, make_rng
from .kernels import KernelSpec, MmdResult, mmd2_unbiased


def _sources(dataset: ExperimentDataset, i: int, j: int) -> list[Condition]:
    a, b = canonical_pair(i, j)
    conds = [CONTROL, Condition.double(a, b), Condition.single(a), Condition.single(b)]
    dataset.require(*conds)
    for c in conds:
        if dataset[c].shape[0] < 2:
            raise DataError(f"{c} has fewer than 2 samples")
    return conds


def build_mixture_pools(dataset: ExperimentDataset, i: int, j: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Balanced pools ``(control + double, single_i + single_j)``.

    Every source is downsampled without replacement to the smallest source
    size; sources already at that size are used as-is.
    """
    rng = make_rng(rng)
    conds = _sources(dataset, i, j)
    size = min(dataset[c].shape[0] for c in conds)
    parts = []
    for c in conds:
        X = dataset[c]
        if X.shape[0] > size:
            X = X[np.sort(rng.choice(X.shape[0], size, replace=False))]
        parts.append(X)
    return np.vstack(parts[:2]), np.vstack(parts[2:])


def disjointedness_score(dataset: ExperimentDataset, i: int, j: int, spec: KernelSpec = KernelSpec(), rng=0) -> MmdResult:
    """Unbiased MMD^2 between the two mixture pools of pair (i, j)."""
    A, B = build_mixture_pools(dataset, i, j, rng)
    return mmd2_unbiased(A, B, spec)


def disjointedness_sweep(
    dataset: ExperimentDataset,
    pairs: Iterable[Pair] | None = None,
    spec: KernelSpec = KernelSpec(),
    seed: int = 0,
    workers: int = 1,
) -> dict[Pair, MmdResult]:
    """Score pairs with pool seeds derived from ``(seed, i, j)``.

    Each pair's value is independent of sweep order, so ``workers > 1``
    (a thread pool; the Gram sums release the GIL) gives identical results.
    """
    pairs = [canonical_pair(*p) for p in (dataset.double_pairs() if pairs is None else pairs)]

    def one(p: Pair) -> MmdResult:
        return disjointedness_score(dataset, *p, spec, derive_rng(seed, *p))

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return dict(zip(pairs, pool.map(one, pairs)))
    return {p: one(p) for p in pairs}


# ---------------------------------------------------------------------------
# embedding composition


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: Mapping[Condition, np.ndarray]

    def __post_init__(self):
        dims = {np.shape(v) for v in self.vectors.values()}
        if len(dims) > 1:
            raise DataError(f"embedding vectors have mixed shapes {sorted(dims)}")
        clean = {}
        for c, v in self.vectors.items():
            v = np.asarray(v, dtype=np.float64).ravel()
            if not np.isfinite(v).all():
                raise DataError(f"non-finite embedding for {c}")
            clean[c] = v
        object.__setattr__(self, "vectors", clean)

    @property
    def dim(self) -> int:
        return next(iter(self.vectors.values())).size if self.vectors else 0

    def __getitem__(self, cond: Condition) -> np.ndarray:
        try:
            return self.vectors[cond]
        except KeyError:
            raise DataError(f"embedding table lacks {cond}") from None


def mean_centered_embeddings(dataset: ExperimentDataset, embeddings: ExperimentDataset | None = None) -> EmbeddingTable:
    """``mean h(x | c) - mean h(x | control)`` for every non-control condition.

    ``embeddings=None`` uses the identity feature map on ``dataset``;
    otherwise per-sample embeddings laid out like a dataset are averaged.
    """
    src = dataset if embeddings is None else embeddings
    src.require(CONTROL)
    base = src[CONTROL].mean(0)
    return EmbeddingTable({c: src[c].mean(0) - base for c in src.conditions if c != CONTROL})


def embedding_residual_score(table: EmbeddingTable, i: int, j: int) -> float:
    """``|| h_ij - h_i - h_j ||_2``; zero when the embeddings compose additively."""
    a, b = canonical_pair(i, j)
    r = table[Condition.double(a, b)] - table[Condition.single(a)] - table[Condition.single(b)]
    return float(np.linalg.norm(r))


def cosine_sq(w_i, w_j) -> float:
    w_i = np.asarray(w_i, dtype=np.float64).ravel()
    w_j = np.asarray(w_j, dtype=np.float64).ravel()
    if w_i.shape != w_j.shape:
        raise DataError("dimension mismatch")
    ni, nj = np.linalg.norm(w_i), np.linalg.norm(w_j)
    if ni == 0 or nj == 0:
        raise DataError("cosine of a zero vector is undefined")
    c = float(w_i @ w_j) / (ni * nj)
    return min(c * c, 1.0)


def severity(w, w_ref) -> float:
    """Sum of ``w`` with signs taken from ``w_ref`` (``sign(0) = 0``)."""
    w = np.asarray(w, dtype=np.float64).ravel()
    w_ref = np.asarray(w_ref, dtype=np.float64).ravel()
    if w.shape != w_ref.shape:
        raise DataError("dimension mismatch")
    return float(np.sum(w * np.sign(w_ref)))
