"""Gibbs sampler for a symmetric low-rank Gaussian model of the score matrix.

Model: ``R_ij = u_i . u_j + eps``, ``u_i ~ N(0, prior_sd^2 I_m)``,
``eps ~ N(0, noise_sd^2)`` for every observed off-diagonal entry. Holding
all other rows fixed, row ``u_i`` has a Gaussian conditional with precision
``I / prior_sd^2 + sum_j u_j u_j^T / noise_sd^2`` over its observed
neighbours ``j``, which gives an exact row-wise Gibbs sweep.

Several independent chains are advanced in lockstep (one batched linear
solve per row); draws are ordered chain-major, then by draw index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import DataError, Pair, ScoreMatrix, make_rng


@dataclass(frozen=True)
class PosteriorHyperParams:
    rank: int = 5
    prior_sd: float = 1.0
    noise_sd: float = 0.1
    n_draws: int = 500
    burn_in: int = 100
    thinning: int = 2
    seed: int = 0
    n_chains: int = 10

    def __post_init__(self):
        if self.rank < 1 or self.n_draws < 1 or self.thinning < 1 or self.n_chains < 1:
            raise ValueError("rank, n_draws, thinning and n_chains must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not (self.prior_sd > 0 and self.noise_sd > 0):
            raise ValueError("prior_sd and noise_sd must be positive")


@dataclass(frozen=True)
class PosteriorDraws:
    factors: np.ndarray  # (k, n, m)

    @property
    def k(self) -> int:
        return self.factors.shape[0]

    @property
    def n(self) -> int:
        return self.factors.shape[1]

    def values(self, pairs: list[Pair]) -> np.ndarray:
        """Sampled rewards ``u_i . u_j`` as a (k, len(pairs)) array."""
        if not pairs:
            return np.empty((self.k, 0))
        a, b = np.asarray(pairs).T
        return np.einsum("kpm,kpm->kp", self.factors[:, a], self.factors[:, b])

    def mean_matrix(self) -> np.ndarray:
        U = self.factors
        return np.einsum("kim,kjm->ij", U, U) / self.k


def _neighbours(observed: ScoreMatrix):
    nbr = [[] for _ in range(observed.n)]
    val = [[] for _ in range(observed.n)]
    for (i, j), v in observed.observed().items():
        nbr[i].append(j)
        val[i].append(v)
        nbr[j].append(i)
        val[j].append(v)
    return [np.array(x, dtype=np.intp) for x in nbr], [np.array(x) for x in val]


def gibbs_sweep(U: np.ndarray, nbr, val, hp: PosteriorHyperParams, rng: np.random.Generator) -> None:
    """One in-place systematic-scan sweep over the rows of every chain."""
    C, n, m = U.shape
    prior_prec = np.eye(m) / hp.prior_sd**2
    inv_var = 1.0 / hp.noise_sd**2
    for i in range(n):
        z = rng.standard_normal((C, m))
        J = nbr[i]
        if J.size == 0:
            U[:, i] = hp.prior_sd * z
            continue
        UJ = U[:, J]  # (C, |J|, m)
        prec = prior_prec + inv_var * np.einsum("cjm,cjk->cmk", UJ, UJ)
        rhs = inv_var * np.einsum("cjm,j->cm", UJ, val[i])
        L = np.linalg.cholesky(prec)
        mean = np.linalg.solve(prec, rhs[..., None])[..., 0]
        # L^T x = z gives x ~ N(0, prec^-1)
        noise = np.linalg.solve(np.swapaxes(L, 1, 2), z[..., None])[..., 0]
        U[:, i] = mean + noise


def gibbs_posterior(observed: ScoreMatrix, hp: PosteriorHyperParams) -> PosteriorDraws:
    """Draw ``hp.n_draws`` factor matrices from p(U | observed entries)."""
    obs = observed.observed()
    if any(not np.isfinite(v) for v in obs.values()):
        raise DataError("non-finite observation")
    rng = make_rng(hp.seed)
    n, m = observed.n, hp.rank
    C = min(hp.n_chains, hp.n_draws)
    per_chain = -(-hp.n_draws // C)
    nbr, val = _neighbours(observed)
    U = hp.prior_sd * rng.standard_normal((C, n, m))
    out = np.empty((per_chain, C, n, m))
    for _ in range(hp.burn_in):
        gibbs_sweep(U, nbr, val, hp, rng)
    for d in range(per_chain):
        for _ in range(hp.thinning):
            gibbs_sweep(U, nbr, val, hp, rng)
        out[d] = U
    draws = np.swapaxes(out, 0, 1).reshape(C * per_chain, n, m)[: hp.n_draws]
    return PosteriorDraws(np.ascontiguousarray(draws))
