import numpy as np
import pytest

from pairscan.core import CONTROL, Condition, DataError, ScoreMatrix, all_pairs
from pairscan.ratio import Knn, separability_sweep
from pairscan.synth import (
    MIXTURE_WEIGHTS,
    MixtureSpec,
    SeparableSpec,
    apply_diffeomorphism,
    gen_disjoint_mixture,
    gen_lowrank_reward,
    gen_separable_tabular,
    invert_diffeomorphism,
    lowrank_factor,
    mixture_components,
    plant_relations,
    random_mlp,
    sample_mixture_latent,
    separable_latent_kl,
    separable_latent_scores,
)

A, B, C, D = (Condition.single(i) for i in range(4))


def test_separable_defaults_shape():
    ds = gen_separable_tabular()
    assert len(ds.conditions) == 11
    assert all(ds[c].shape == (20_000, 3) for c in ds.conditions)
    assert ds.metadata["ground_truth_pairs"] == [(0, 1), (2, 3)]
    assert ds.names == ("A", "B", "C", "D")


def test_separable_identity_map_means():
    ds = gen_separable_tabular(SeparableSpec(mlp_depth=0, seed=1))
    np.testing.assert_allclose(ds[CONTROL].mean(0), [0, 0, 0], atol=0.05)
    np.testing.assert_allclose(ds[A].mean(0), [3, 0, 0], atol=0.05)
    np.testing.assert_allclose(ds[Condition.double(0, 1)].mean(0), [3, 3, 0], atol=0.05)
    np.testing.assert_allclose(ds[Condition.double(0, 2)].mean(0), [3, 0, 3], atol=0.05)


def test_separable_latent_oracle_values():
    assert separable_latent_kl(A) == 4.5
    assert separable_latent_kl(B) == 9.0
    assert separable_latent_kl(Condition.double(0, 1)) == 9.0
    assert separable_latent_kl(Condition.double(0, 2)) == 9.0
    scores = separable_latent_scores()
    assert scores[(0, 1)] == 4.5 and scores[(2, 3)] == 4.5
    assert all(v == 0.0 for p, v in scores.items() if p not in ((0, 1), (2, 3)))


def test_separable_seeded():
    a = gen_separable_tabular(SeparableSpec(n_per_class=50, seed=4))
    b = gen_separable_tabular(SeparableSpec(n_per_class=50, seed=4))
    for c in a.conditions:
        np.testing.assert_array_equal(a[c], b[c])


@pytest.mark.parametrize("seed", [100, 101, 102])
def test_ranking_preserved_under_random_diffeomorphism(seed):
    ds = gen_separable_tabular(SeparableSpec(n_per_class=5000, seed=seed))
    res, _ = separability_sweep(ds, None, Knn(5))
    top = sorted(res, key=lambda p: res[p].score, reverse=True)[:2]
    assert set(top) == {(0, 1), (2, 3)}


def test_mixture_condition_count():
    ds = gen_disjoint_mixture(MixtureSpec(n_per_class=100))
    assert len(ds.conditions) == 29
    assert ds.dim == 3
    assert ds.metadata["ground_truth_pairs"] == [(3, 4), (5, 6)]


def test_mixture_weights_recovered():
    for cond in (CONTROL, Condition.single(3), Condition.double(5, 6)):
        _, labels = sample_mixture_latent(cond, 20_000, 0)
        freq = np.bincount(labels, minlength=6) / 20_000
        np.testing.assert_allclose(freq, MIXTURE_WEIGHTS, atol=0.01)


def test_mixture_weights_never_perturbed():
    np.testing.assert_array_equal(MIXTURE_WEIGHTS, np.array([1, 1, 1, 1, 2, 2]) / 8)
    conds = [CONTROL, *(Condition.single(i) for i in range(7))] + [Condition.double(i, j) for i, j in all_pairs(7)]
    for c in conds:
        assert len(mixture_components(c)) == len(MIXTURE_WEIGHTS)


def test_single_d_changes_only_component_four():
    base, d = mixture_components(CONTROL), mixture_components(Condition.single(3))
    assert [k for k in range(6) if base[k] != d[k]] == [4]
    z, labels = sample_mixture_latent(Condition.single(3), 20_000, 1)
    assert abs(z[labels == 4].var() - 25) < 2.5
    assert abs(z[labels == 0].var() - 1) < 0.1


def test_joint_tables():
    assert mixture_components(Condition.double(3, 4))[4] == ("normal", 10.0, 5.0)
    assert mixture_components(Condition.double(5, 6))[5] == ("cauchy", 20.0, 1.0)


def test_disjoint_doubles_satisfy_mixture_identity_at_latent_level():
    # components of (double + control) equal those of (single_i + single_j)
    for i, j in all_pairs(7):
        if (i, j) in ((3, 4), (5, 6)):
            continue
        dbl, ctl = mixture_components(Condition.double(i, j)), mixture_components(CONTROL)
        si, sj = mixture_components(Condition.single(i)), mixture_components(Condition.single(j))
        for k in range(6):
            assert sorted([dbl[k], ctl[k]]) == sorted([si[k], sj[k]])


def test_interacting_doubles_violate_identity():
    for i, j in ((3, 4), (5, 6)):
        k = 4 if i == 3 else 5
        lhs = sorted([mixture_components(Condition.double(i, j))[k], mixture_components(CONTROL)[k]])
        rhs = sorted([mixture_components(Condition.single(i))[k], mixture_components(Condition.single(j))[k]])
        assert lhs != rhs


def test_zero_depth_mlp_is_identity():
    mlp = random_mlp(3, 0, 0)
    z = np.random.default_rng(0).normal(size=(10, 3))
    np.testing.assert_array_equal(apply_diffeomorphism(mlp, z), z)


@pytest.mark.parametrize("depth", [1, 7, 10])
def test_diffeomorphism_inverts(depth):
    rng = np.random.default_rng(depth)
    mlp = random_mlp(3, depth, rng)
    z = rng.normal(size=(100, 3)) * 3
    assert np.abs(invert_diffeomorphism(mlp, apply_diffeomorphism(mlp, z)) - z).max() < 1e-6


def test_diffeomorphism_injective():
    rng = np.random.default_rng(5)
    mlp = random_mlp(3, 7, rng)
    x = apply_diffeomorphism(mlp, rng.normal(size=(1000, 3)))
    assert len({tuple(r) for r in x}) == 1000


def test_mlp_layers_nonsingular():
    mlp = random_mlp(3, 10, 2)
    assert all(abs(np.linalg.det(W)) > 1e-9 for W in mlp.weights)


def test_diffeomorphism_dimension_mismatch():
    with pytest.raises(DataError):
        apply_diffeomorphism(random_mlp(3, 2, 0), np.zeros((4, 2)))


def test_lowrank_full_rank():
    R = gen_lowrank_reward(8, 8, 0.0, seed=0)
    U = lowrank_factor(8, 8, 0)
    np.testing.assert_allclose(R.to_dense(0.0) + np.diag((U * U).sum(1)), U @ U.T, atol=1e-12)
    assert np.linalg.matrix_rank(U @ U.T, tol=1e-8) == 8


def test_lowrank_rank_one_minors_vanish():
    R = gen_lowrank_reward(10, 1, 0.0, seed=3).to_dense()
    scale = np.nanmax(np.abs(R)) ** 2
    for i, j, k, l in [(0, 1, 2, 3), (4, 5, 6, 7), (0, 9, 3, 8), (1, 2, 5, 9)]:
        assert abs(R[i, j] * R[k, l] - R[i, l] * R[k, j]) < 1e-8 * scale


def test_lowrank_seeded_and_complete():
    a, b = gen_lowrank_reward(12, 3, 0.1, 5), gen_lowrank_reward(12, 3, 0.1, 5)
    assert a == b and a.is_complete()
    assert a != gen_lowrank_reward(12, 3, 0.1, 6)


def test_lowrank_factor_variance():
    U = lowrank_factor(2000, 4, 0)
    np.testing.assert_allclose(U.var(), 4**-0.5, rtol=0.03)


def test_lowrank_rank_out_of_range():
    with pytest.raises(ValueError):
        gen_lowrank_reward(5, 6)
    with pytest.raises(ValueError):
        gen_lowrank_reward(5, 0)


def test_plant_relations():
    truth = gen_lowrank_reward(30, 3, 0.0, 1)
    rel = plant_relations(truth, 20, 0.1, 0.5, seed=2)
    assert len(rel) == 20
    vals = truth.values(all_pairs(30))
    cutoff = np.sort(vals)[::-1][int(np.ceil(0.1 * len(vals))) - 1]
    assert sum(truth.get(*p) >= cutoff for p in rel) == 10
    assert plant_relations(truth, 20, 0.1, 0.5, seed=2) == rel
    with pytest.raises(DataError):
        plant_relations(ScoreMatrix(4), 1)
