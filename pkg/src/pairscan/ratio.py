"""KL-divergence estimators and the separability (KL-additivity) score.

Every divergence is taken as KL(control || condition). With the k-NN route
``P`` is the control sample and ``Q`` the condition sample; with the NRE
route the log-ratio ``log p(x|control) / p(x|condition)`` is evaluated on
control samples (the P-expectation) and on condition samples (the clipped
Q-expectation of SMILE).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.spatial import cKDTree

from .core import CONTROL, Condition, DataError, ExperimentDataset, Pair, as_samples, canonical_pair
from .nre import NreTrainConfig, RatioModel, nre_log_ratio, nre_train

DIST_FLOOR = 1e-12


@dataclass(frozen=True)
class Knn:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class NreSmile:
    config: NreTrainConfig = field(default_factory=NreTrainConfig)
    tau: float = 5.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


KlEstimatorChoice = Knn | NreSmile


def knn_kl(P, Q, k: int = 5) -> float:
    """k-nearest-neighbour estimate of KL(P || Q) (Wang, Kulkarni & Verdu 2009).

    ``(d / n) * sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1))`` where
    ``rho_k(i)`` is the distance from ``p_i`` to its k-th neighbour in
    ``P \\ {p_i}`` and ``nu_k(i)`` the distance to its k-th neighbour in Q.
    Zero distances are floored at 1e-12.
    """
    P = as_samples(P, "P")
    Q = as_samples(Q, "Q")
    n, d = P.shape
    m = Q.shape[0]
    if P.shape[1] != Q.shape[1]:
        raise DataError(f"dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    if k < 1 or n <= k or m <= k:
        raise DataError(f"k={k} out of range for sample sizes n={n}, m={m}")
    # k+1 because the query point itself is returned at distance 0
    rho = cKDTree(P).query(P, k=[k + 1])[0][:, 0]
    nu = cKDTree(Q).query(P, k=[k])[0][:, 0]
    rho = np.maximum(rho, DIST_FLOOR)
    nu = np.maximum(nu, DIST_FLOOR)
    return float(d * np.mean(np.log(nu / rho)) + np.log(m / (n - 1)))


def smile_kl(log_ratios_on_P, log_ratios_on_Q, tau: float = 5.0) -> float:
    """SMILE estimate ``mean_P[f] - log mean_Q[clip(exp f, e^-tau, e^tau)]``.

    ``f`` is the log-ratio log p/q evaluated on samples of each population.
    Only the Q-side exponential is clipped; ``tau=np.inf`` gives the
    unclipped (MILE) estimate.
    """
    fp = np.asarray(log_ratios_on_P, dtype=np.float64).ravel()
    fq = np.asarray(log_ratios_on_Q, dtype=np.float64).ravel()
    if fp.size == 0 or fq.size == 0:
        raise DataError("smile_kl needs non-empty log-ratio vectors")
    if not (np.isfinite(fp).all() and np.isfinite(fq).all()):
        raise DataError("smile_kl received non-finite log-ratios")
    if not tau > 0:
        raise ValueError("tau must be positive")
    # clip in log space, then log-mean-exp for stability
    fq = np.clip(fq, -tau, tau)
    top = fq.max()
    log_mean = top + np.log(np.mean(np.exp(fq - top)))
    return float(fp.mean() - log_mean)


@dataclass(frozen=True)
class SeparabilityResult:
    score: float
    kl_i: float
    kl_j: float
    kl_ij: float


def _condition_kl(dataset: ExperimentDataset, cond: Condition, estimator, model: RatioModel | None) -> float:
    P, Q = dataset[CONTROL], dataset[cond]
    if isinstance(estimator, Knn):
        return knn_kl(P, Q, estimator.k)
    if model is None:
        raise ValueError("NRE estimator needs a trained ratio model")
    return smile_kl(
        nre_log_ratio(model, P, CONTROL, cond), nre_log_ratio(model, Q, CONTROL, cond), estimator.tau
    )


def _triples(i: int, j: int):
    a, b = canonical_pair(i, j)
    return Condition.single(a), Condition.single(b), Condition.double(a, b)


def separability_score(
    dataset: ExperimentDataset, i: int, j: int, estimator: KlEstimatorChoice = Knn(), model: RatioModel | None = None
) -> SeparabilityResult:
    """|KL(p0||pi) + KL(p0||pj) - KL(p0||pij)| with the three KLs for diagnostics.

    For :class:`NreSmile` a ``model`` trained on all conditions may be passed;
    otherwise one is trained here with the estimator's config.
    """
    si, sj, dij = _triples(i, j)
    dataset.require(CONTROL, si, sj, dij)
    if isinstance(estimator, NreSmile) and model is None:
        model = nre_train(dataset, estimator.config)
    kls = [_condition_kl(dataset, c, estimator, model) for c in (si, sj, dij)]
    return SeparabilityResult(abs(kls[0] + kls[1] - kls[2]), *kls)


def separability_sweep(
    dataset: ExperimentDataset,
    pairs: Iterable[Pair] | None = None,
    estimator: KlEstimatorChoice = Knn(),
    model: RatioModel | None = None,
) -> tuple[dict[Pair, SeparabilityResult], RatioModel | None]:
    """Score many pairs, estimating each condition's KL once.

    With :class:`NreSmile` one model is trained on every condition of the
    dataset (unless supplied) and shared by all pairs.
    """
    pairs = [canonical_pair(*p) for p in (dataset.double_pairs() if pairs is None else pairs)]
    for p in pairs:
        dataset.require(CONTROL, *_triples(*p))
    if isinstance(estimator, NreSmile) and model is None:
        model = nre_train(dataset, estimator.config)
    cache: dict[Condition, float] = {}

    def kl(c: Condition) -> float:
        if c not in cache:
            cache[c] = _condition_kl(dataset, c, estimator, model)
        return cache[c]

    out = {}
    for p in pairs:
        si, sj, dij = _triples(*p)
        ki, kj, kij = kl(si), kl(sj), kl(dij)
        out[p] = SeparabilityResult(abs(ki + kj - kij), ki, kj, kij)
    return out, model


def condition_kls(results: Mapping[Pair, SeparabilityResult]) -> dict[str, float]:
    """Flatten per-condition KLs from sweep results, keyed by condition label."""
    flat = {}
    for (a, b), r in results.items():
        flat[str(Condition.single(a))] = r.kl_i
        flat[str(Condition.single(b))] = r.kl_j
        flat[str(Condition.double(a, b))] = r.kl_ij
    return flat
