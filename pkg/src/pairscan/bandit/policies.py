"""Batch selection rules over the posterior draws.

Every function takes the remaining pairs in any order and works on them in
canonical (sorted) order, so ties always fall to the lowest pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..core import Pair, ScoreMatrix, canonical_pair, make_rng
from .posterior import PosteriorDraws

IDS, TS, UCB, US, RANDOM, ORACLE = "ids", "ts", "ucb", "us", "random", "oracle"
POLICY_KINDS = (IDS, TS, UCB, US, RANDOM, ORACLE)


@dataclass(frozen=True)
class PolicyConfig:
    """``kind`` is one of ids, ts, ucb, us, random or oracle.

    ``lam`` is the IDS regret exponent and ``beta`` the UCB width; the
    oracle policy reads the true matrix and exists for testing.
    """

    kind: str = IDS
    batch: int = 10
    lam: float = 2.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy {self.kind!r}; expected one of {', '.join(POLICY_KINDS)}")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if not self.lam >= 1:
            raise ValueError("lam must be >= 1")
        if not self.beta >= 0:
            raise ValueError("beta must be nonnegative")

    @property
    def needs_posterior(self) -> bool:
        return self.kind not in (RANDOM, ORACLE)


def _sorted_pairs(remaining: Iterable[Pair]) -> list[Pair]:
    pairs = sorted({canonical_pair(*p) for p in remaining})
    if not pairs:
        raise ValueError("remaining pair set is empty")
    return pairs


def _regret_array(V: np.ndarray) -> np.ndarray:
    return np.mean(V.max(axis=1, keepdims=True) - V, axis=0)


def _condvar_array(V: np.ndarray) -> np.ndarray:
    star = V.argmax(axis=1)  # first maximum, i.e. the lowest canonical pair
    overall = V.mean(axis=0)
    v = np.zeros(V.shape[1])
    for g in np.unique(star):
        rows = V[star == g]
        v += rows.shape[0] / V.shape[0] * (rows.mean(axis=0) - overall) ** 2
    return v


def instant_regret(draws: PosteriorDraws, remaining: Iterable[Pair]) -> dict[Pair, float]:
    """Expected instantaneous regret ``E[R(a*) - R(a)]`` of each remaining pair."""
    pairs = _sorted_pairs(remaining)
    return dict(zip(pairs, _regret_array(draws.values(pairs)).tolist()))


def conditional_variance(draws: PosteriorDraws, remaining: Iterable[Pair]) -> dict[Pair, float]:
    """Variance over the optimal-pair identity of the conditional mean reward."""
    pairs = _sorted_pairs(remaining)
    return dict(zip(pairs, _condvar_array(draws.values(pairs)).tolist()))


def information_ratio(delta: np.ndarray, v: np.ndarray, lam: float) -> np.ndarray:
    """``delta**lam / v`` with 0 for delta == 0 and +inf for v == 0 < delta."""
    psi = np.full(delta.shape, np.inf)
    zero = delta == 0
    psi[zero] = 0.0
    ok = ~zero & (v > 0)
    psi[ok] = delta[ok] ** lam / v[ok]
    return psi


def _top(score: np.ndarray, b: int) -> np.ndarray:
    # stable sort keeps canonical order among ties
    return np.argsort(-score, kind="stable")[:b]


def select_batch(
    policy: PolicyConfig,
    draws: PosteriorDraws | None,
    remaining: Iterable[Pair],
    rng=None,
    truth: ScoreMatrix | None = None,
) -> list[Pair]:
    """Choose ``policy.batch`` distinct pairs from ``remaining``, in selection order."""
    pairs = _sorted_pairs(remaining)
    b = policy.batch
    if b > len(pairs):
        raise ValueError(f"batch {b} larger than the {len(pairs)} remaining pairs")
    kind = policy.kind
    if kind == RANDOM:
        idx = make_rng(rng).choice(len(pairs), size=b, replace=False)
        return [pairs[i] for i in idx]
    if kind == ORACLE:
        if truth is None:
            raise ValueError("oracle policy needs the true score matrix")
        return [pairs[i] for i in _top(truth.values(pairs), b)]
    if draws is None:
        raise ValueError(f"policy {kind!r} needs posterior draws")
    V = draws.values(pairs)
    if kind == IDS:
        psi = information_ratio(_regret_array(V), _condvar_array(V), policy.lam)
        idx = np.argsort(psi, kind="stable")[:b]
    elif kind == TS:
        taken = np.zeros(len(pairs), dtype=bool)
        idx = []
        for t in range(b):
            row = np.where(taken, -np.inf, V[t % V.shape[0]])
            a = int(np.argmax(row))
            taken[a] = True
            idx.append(a)
    elif kind == UCB:
        idx = _top(V.mean(axis=0) + policy.beta * V.std(axis=0), b)
    else:  # US
        idx = _top(V.std(axis=0), b)
    return [pairs[i] for i in idx]

