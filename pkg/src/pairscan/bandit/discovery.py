"""Sequential batch discovery over a fully known score matrix, plus metrics.

Each round refits the posterior from scratch on the revealed history,
selects a batch, and reveals the true entries. Regret is measured against
an oracle that reveals the best remaining true entries every round; after
``N`` reveals that oracle holds the ``N`` largest entries overall.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..core import Pair, RelationSet, ScoreMatrix, all_pairs, canonical_pair, derive_rng, seed_from
from ..io import write_rows
from .policies import PolicyConfig, select_batch
from .posterior import PosteriorHyperParams, gibbs_posterior

log = logging.getLogger(__name__)


@dataclass
class DiscoveryState:
    """Revealed history ``(round, pair, score)`` and the unobserved pairs."""

    n: int
    history: list[tuple[int, Pair, float]] = field(default_factory=list)
    remaining: set[Pair] = field(default_factory=set)
    round: int = 0

    @classmethod
    def start(cls, n: int) -> "DiscoveryState":
        return cls(n, [], set(all_pairs(n)), 0)

    def observed(self) -> ScoreMatrix:
        return ScoreMatrix(self.n, {p: v for _, p, v in self.history})

    def reveal(self, pairs: list[Pair], truth: ScoreMatrix) -> None:
        self.round += 1
        for p in pairs:
            p = canonical_pair(*p)
            if p not in self.remaining:
                raise ValueError(f"pair {p} is not available")
            self.remaining.remove(p)
            self.history.append((self.round, p, truth.get(*p)))
        self.check()

    def check(self) -> None:
        seen = [p for _, p, _ in self.history]
        total = self.n * (self.n - 1) // 2
        if len(set(seen)) != len(seen) or set(seen) & self.remaining or len(seen) + len(self.remaining) != total:
            raise AssertionError("history and remaining pairs do not partition the pair set")


@dataclass(frozen=True)
class DiscoveryMetrics:
    """Per-round series; index ``r`` refers to the state after round ``r + 1``."""

    regret: np.ndarray
    recovery: np.ndarray
    known: np.ndarray
    policy_sum: np.ndarray
    oracle_sum: np.ndarray

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, self.regret.size + 1)


def top_set(truth: ScoreMatrix, percentile: float) -> set[Pair]:
    """The ``ceil(pct/100 * #pairs)`` highest entries, ties to canonical order."""
    if not 0 < percentile < 100:
        raise ValueError("percentile must lie strictly between 0 and 100")
    pairs = all_pairs(truth.n)
    size = math.ceil(percentile / 100 * len(pairs))
    vals = truth.values(pairs)
    order = np.argsort(-vals, kind="stable")[:size]
    return {pairs[i] for i in order}


def compute_metrics(
    state: DiscoveryState, truth: ScoreMatrix, relations: RelationSet = RelationSet(), percentile: float = 5.0
) -> DiscoveryMetrics:
    if not truth.is_complete():
        raise ValueError("truth matrix must be fully observed")
    top = top_set(truth, percentile)
    ranked = np.sort(truth.values(all_pairs(truth.n)))[::-1]
    oracle_prefix = np.concatenate([[0.0], np.cumsum(ranked)])
    T = state.round
    regret, recovery, known, psum, osum = (np.zeros(T) for _ in range(5))
    total = hits = count = 0
    found = 0.0
    k = 0
    hist = state.history
    for r in range(1, T + 1):
        while k < len(hist) and hist[k][0] == r:
            _, p, v = hist[k]
            found += v
            total += 1
            hits += p in top
            count += p in relations
            k += 1
        psum[r - 1] = found
        osum[r - 1] = oracle_prefix[total]
        regret[r - 1] = osum[r - 1] - found
        recovery[r - 1] = hits / len(top)
        known[r - 1] = count
    return DiscoveryMetrics(regret, recovery, known.astype(int), psum, osum)


def run_discovery(
    env: ScoreMatrix,
    policy: PolicyConfig,
    hp: PosteriorHyperParams,
    rounds: int,
    seed: int = 0,
    relations: RelationSet = RelationSet(),
    percentile: float = 5.0,
) -> tuple[DiscoveryState, DiscoveryMetrics]:
    """Run ``rounds`` rounds of batch selection against ``env``.

    Round ``t`` seeds its posterior and policy randomness from
    ``(seed, t)``, so runs are bit-reproducible; ``hp.seed`` is ignored.
    """
    if not env.is_complete():
        raise ValueError("environment matrix must be fully observed")
    n_pairs = env.n * (env.n - 1) // 2
    if rounds * policy.batch > n_pairs:
        raise ValueError(f"budget {rounds} x {policy.batch} exceeds the {n_pairs} available pairs")
    state = DiscoveryState.start(env.n)
    for t in range(1, rounds + 1):
        draws = None
        if policy.needs_posterior:
            draws = gibbs_posterior(state.observed(), replace(hp, seed=seed_from(derive_rng(seed, t, 0))))
        batch = select_batch(policy, draws, state.remaining, derive_rng(seed, t, 1), truth=env)
        state.reveal(batch, env)
        log.info("round %d: revealed %d pairs, best so far %.4g", t, len(batch), max(v for _, _, v in state.history))
    return state, compute_metrics(state, env, relations, percentile)


def write_history(path: str | Path, state: DiscoveryState) -> None:
    write_rows(path, ["round", "i", "j", "score"], ([r, i, j, float(v)] for r, (i, j), v in state.history))


def write_metrics(path: str | Path, metrics: DiscoveryMetrics) -> None:
    rows = zip(metrics.rounds, metrics.regret.astype(float), metrics.recovery.astype(float), metrics.known)
    write_rows(path, ["round", "regret", "recovery", "known_count"], ([int(r), g, c, int(k)] for r, g, c, k in rows))
