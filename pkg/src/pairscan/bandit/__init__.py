"""Adaptive discovery of high-scoring perturbation pairs."""
from .discovery import (
    DiscoveryMetrics,
    DiscoveryState,
    compute_metrics,
    run_discovery,
    top_set,
    write_history,
    write_metrics,
)
from .policies import (
    POLICY_KINDS,
    PolicyConfig,
    conditional_variance,
    information_ratio,
    instant_regret,
    select_batch,
)
from .posterior import PosteriorDraws, PosteriorHyperParams, gibbs_posterior, gibbs_sweep

__all__ = [
    "DiscoveryMetrics",
    "DiscoveryState",
    "POLICY_KINDS",
    "PolicyConfig",
    "PosteriorDraws",
    "PosteriorHyperParams",
    "compute_metrics",
    "conditional_variance",
    "gibbs_posterior",
    "gibbs_sweep",
    "information_ratio",
    "instant_regret",
    "run_discovery",
    "select_batch",
    "top_set",
    "write_history",
    "write_metrics",
]
