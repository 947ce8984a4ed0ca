"""Synthetic interventional benchmarks and low-rank reward matrices.

Two tabular generators are provided:

* :func:`gen_separable_tabular` - three independent N(0, 1) latents; a
  perturbation moves one or two of them to N(3, 1). A and B share the first
  latent, C and D the third, so A-B and C-D are the inseparable pairs.
* :func:`gen_disjoint_mixture` - a 1-D six-component mixture where each
  perturbation replaces mixture components. D/E and F/G act on the same
  component, so D-E and F-G are the non-disjoint pairs.

Latents are pushed through a random invertible leaky-ReLU MLP.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import CONTROL, Condition, DataError, ExperimentDataset, RelationSet, ScoreMatrix, all_pairs, make_rng


@dataclass(frozen=True)
class SeparableSpec:
    n_per_class: int = 20_000
    mlp_depth: int = 7
    leaky_slope: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1 or self.mlp_depth < 0 or not 0 < self.leaky_slope < 1:
            raise ValueError(f"invalid SeparableSpec {self}")


@dataclass(frozen=True)
class MixtureSpec:
    n_per_class: int = 20_000
    mlp_depth: int = 10
    leaky_slope: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1 or self.mlp_depth < 0 or not 0 < self.leaky_slope < 1:
            raise ValueError(f"invalid MixtureSpec {self}")


# ---------------------------------------------------------------------------
# random invertible MLP


@dataclass(frozen=True)
class RandomMlp:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    slope: float = 0.7

    @property
    def dim(self) -> int | None:
        return self.weights[0].shape[0] if self.weights else None

    @property
    def depth(self) -> int:
        return len(self.weights)


def random_mlp(dim: int, depth: int, rng, slope: float = 0.7) -> RandomMlp:
    """Haar-random orthogonal layers with small uniform biases.

    Orthogonal weights keep every layer an isometry, so the only distortion
    comes from the leaky-ReLU kinks (local singular values stay within
    ``[slope**depth, 1]``).
    """
    rng = make_rng(rng)
    Ws, bs = [], []
    bound = 1.0 / np.sqrt(dim)
    for _ in range(depth):
        Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
        Ws.append(Q * np.sign(np.diag(R)))
        bs.append(rng.uniform(-bound, bound, size=dim))
    return RandomMlp(tuple(Ws), tuple(bs), slope)


def apply_diffeomorphism(mlp: RandomMlp, latents) -> np.ndarray:
    """Row-wise ``g(z)``; leaky ReLU after every layer but the last."""
    x = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    if mlp.depth == 0:
        return x.copy()
    if x.shape[1] != mlp.dim:
        raise DataError(f"latent dimension {x.shape[1]} differs from MLP width {mlp.dim}")
    last = mlp.depth - 1
    for k, (W, b) in enumerate(zip(mlp.weights, mlp.biases)):
        x = x @ W + b
        if k < last:
            x = np.where(x > 0, x, mlp.slope * x)
    return x


def invert_diffeomorphism(mlp: RandomMlp, x) -> np.ndarray:
    z = np.atleast_2d(np.asarray(x, dtype=np.float64))
    last = mlp.depth - 1
    for k in range(last, -1, -1):
        if k < last:
            z = np.where(z > 0, z, z / mlp.slope)
        z = np.linalg.solve(mlp.weights[k].T, (z - mlp.biases[k]).T).T
    return z


# ---------------------------------------------------------------------------
# separable example

SEPARABLE_NAMES = ("A", "B", "C", "D")
# latent coordinates moved to N(3, 1) by each single perturbation
SEPARABLE_TARGETS = {0: (0,), 1: (0, 1), 2: (2,), 3: (2,)}
SEPARABLE_SHIFT = 3.0


def separable_shifted(cond: Condition) -> tuple[int, ...]:
    coords = set()
    for i in cond.indices:
        coords.update(SEPARABLE_TARGETS[i])
    return tuple(sorted(coords))


def separable_latent_kl(cond: Condition) -> float:
    """Exact latent KL(control || cond): a unit-variance shift costs 3^2/2 per coordinate."""
    return len(separable_shifted(cond)) * SEPARABLE_SHIFT**2 / 2


def separable_latent_scores() -> dict[tuple[int, int], float]:
    """Closed-form latent-space separability scores for all six pairs."""
    kl = separable_latent_kl
    return {
        (i, j): abs(kl(Condition.single(i)) + kl(Condition.single(j)) - kl(Condition.double(i, j)))
        for i, j in all_pairs(4)
    }


def _conditions(n: int) -> list[Condition]:
    return [CONTROL, *(Condition.single(i) for i in range(n)), *(Condition.double(i, j) for i, j in combinations(range(n), 2))]


def gen_separable_tabular(spec: SeparableSpec = SeparableSpec()) -> ExperimentDataset:
    rng = make_rng(spec.seed)
    mlp = random_mlp(3, spec.mlp_depth, rng, spec.leaky_slope)
    samples = {}
    for cond in _conditions(4):
        z = rng.standard_normal((spec.n_per_class, 3))
        z[:, list(separable_shifted(cond))] += SEPARABLE_SHIFT
        samples[cond] = apply_diffeomorphism(mlp, z)
    meta = {"generator": "separable", "ground_truth_pairs": [(0, 1), (2, 3)], "seed": spec.seed}
    return ExperimentDataset(4, samples, SEPARABLE_NAMES, meta)


# ---------------------------------------------------------------------------
# disjoint mixture example

MIXTURE_NAMES = ("A", "B", "C", "D", "E", "F", "G")
MIXTURE_WEIGHTS = np.array([1, 1, 1, 1, 2, 2]) / 8
# (family, location, scale); control has every component at N(0, 1)
_BASE = ("normal", 0.0, 1.0)
_SINGLE = {
    0: {1: ("normal", 5.0, 1.0)},
    1: {2: ("normal", 10.0, 1.0)},
    2: {3: ("normal", -5.0, 5.0)},
    3: {4: ("normal", 0.0, 5.0)},
    4: {4: ("normal", -10.0, 5.0)},
    5: {5: ("cauchy", 15.0, 1.0)},
    6: {5: ("cauchy", -15.0, 1.0)},
}
_JOINT = {(3, 4): {4: ("normal", 10.0, 5.0)}, (5, 6): {5: ("cauchy", 20.0, 1.0)}}


def mixture_components(cond: Condition) -> list[tuple[str, float, float]]:
    """Component distributions under ``cond``; the weights never change."""
    comps = [_BASE] * len(MIXTURE_WEIGHTS)
    if cond.rank == 2 and (cond.i, cond.j) in _JOINT:
        edits = _JOINT[(cond.i, cond.j)]
    else:
        edits = {}
        for i in cond.indices:
            edits.update(_SINGLE[i])
    for k, c in edits.items():
        comps[k] = c
    return comps


def sample_mixture_latent(cond: Condition, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` 1-D latents; returns (values, component labels)."""
    rng = make_rng(rng)
    labels = rng.choice(len(MIXTURE_WEIGHTS), size=n, p=MIXTURE_WEIGHTS)
    z = np.empty(n)
    for k, (family, loc, scale) in enumerate(mixture_components(cond)):
        sel = labels == k
        cnt = int(sel.sum())
        if family == "normal":
            z[sel] = loc + scale * rng.standard_normal(cnt)
        else:
            z[sel] = loc + scale * np.tan(np.pi * (rng.random(cnt) - 0.5))
    return z, labels


def gen_disjoint_mixture(spec: MixtureSpec = MixtureSpec()) -> ExperimentDataset:
    """1-D mixture latent padded with two N(0, 1) nuisance coordinates, then g."""
    rng = make_rng(spec.seed)
    mlp = random_mlp(3, spec.mlp_depth, rng, spec.leaky_slope)
    samples = {}
    for cond in _conditions(7):
        z, _ = sample_mixture_latent(cond, spec.n_per_class, rng)
        latent = np.column_stack([z, rng.standard_normal((spec.n_per_class, 2))])
        samples[cond] = apply_diffeomorphism(mlp, latent)
    meta = {"generator": "mixture", "ground_truth_pairs": [(3, 4), (5, 6)], "seed": spec.seed}
    return ExperimentDataset(7, samples, MIXTURE_NAMES, meta)


# ---------------------------------------------------------------------------
# low-rank rewards


def lowrank_factor(n: int, rank: int, rng) -> np.ndarray:
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in [1, {n}], got {rank}")
    return make_rng(rng).normal(0.0, rank**-0.25, size=(n, rank))


def gen_lowrank_reward(n: int, rank: int, noise_sd: float = 0.0, seed: int = 0) -> ScoreMatrix:
    """Fully observed ``U U^T`` (+ symmetric Gaussian noise), U entries of variance 1/sqrt(rank)."""
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = make_rng(seed)
    U = lowrank_factor(n, rank, rng)
    R = U @ U.T
    if noise_sd > 0:
        R = R + np.triu(rng.normal(0.0, noise_sd, size=(n, n)), 1)
    return ScoreMatrix.from_dense(R)


def plant_relations(
    truth: ScoreMatrix, n_relations: int, top_fraction: float = 0.1, hit_rate: float = 0.5, seed: int = 0
) -> RelationSet:
    """Known-relation set biased towards high scores.

    ``round(hit_rate * n_relations)`` pairs are drawn from the top
    ``top_fraction`` of entries (ties to canonical order) and the rest
    uniformly from the remaining pairs, all without replacement.
    """
    if not truth.is_complete():
        raise DataError("truth matrix must be fully observed")
    if not (0 < top_fraction < 1 and 0 <= hit_rate <= 1):
        raise ValueError("top_fraction must lie in (0, 1) and hit_rate in [0, 1]")
    pairs = all_pairs(truth.n)
    order = np.argsort(-truth.values(pairs), kind="stable")
    n_top = int(np.ceil(top_fraction * len(pairs)))
    n_hit = int(round(hit_rate * n_relations))
    if n_hit > n_top or n_relations - n_hit > len(pairs) - n_top or n_relations < 0:
        raise ValueError(f"cannot plant {n_relations} relations in a {truth.n}-perturbation matrix")
    rng = make_rng(seed)
    hit = rng.choice(order[:n_top], n_hit, replace=False)
    miss = rng.choice(order[n_top:], n_relations - n_hit, replace=False)
    return RelationSet(pairs[i] for i in np.concatenate([hit, miss]).astype(int))
