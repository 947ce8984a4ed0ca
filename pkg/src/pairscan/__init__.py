"""Pairwise perturbation interaction tests and adaptive pair discovery.

Modules: :mod:`core` (datasets, score matrices, seeding), :mod:`kernels`
(MMD), :mod:`ratio` (KL estimators, separability), :mod:`disjoint`
(disjointedness, embedding metrics), :mod:`synth` (benchmarks),
:mod:`bandit` (posterior, policies, discovery loop) and :mod:`cli`.
"""
__version__ = "0.1.0"
