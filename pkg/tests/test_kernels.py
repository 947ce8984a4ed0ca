import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pairscan.core import DataError
from pairscan.kernels import (
    MATERN25,
    RBF,
    KernelSpec,
    kernel_eval,
    kernel_matrix,
    median_heuristic_bandwidth,
    mmd2_unbiased,
    mmd_permutation_pvalue,
)


def naive_kernel(family, sigma, x, y):
    r = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))
    if family == RBF:
        return math.exp(-(r**2) / (2 * sigma**2))
    s = math.sqrt(5) * r / sigma
    return (1 + s + s * s / 3) * math.exp(-s)


def naive_mmd2(family, sigma, X, Y):
    n, m = len(X), len(Y)
    sxx = sum(naive_kernel(family, sigma, X[i], X[j]) for i in range(n) for j in range(n) if i != j)
    syy = sum(naive_kernel(family, sigma, Y[i], Y[j]) for i in range(m) for j in range(m) if i != j)
    sxy = sum(naive_kernel(family, sigma, x, y) for x in X for y in Y)
    return sxx / (n * (n - 1)) + syy / (m * (m - 1)) - 2 * sxy / (n * m)


def test_rbf_identity_and_distance_two():
    spec = KernelSpec(RBF, 1.0)
    assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == 1.0
    np.testing.assert_allclose(kernel_eval(spec, [0.0, 0.0], [2.0, 0.0]), math.exp(-2), rtol=1e-15)
    np.testing.assert_allclose(kernel_eval(spec, [0.0, 0.0], [2.0, 0.0]), 0.135335, atol=1e-6)


def test_matern_identity_and_closed_form():
    spec = KernelSpec(MATERN25, 2.0)
    assert kernel_eval(spec, [3.0], [3.0]) == 1.0
    r, s = 1.5, 2.0
    expected = (1 + math.sqrt(5) * r / s + 5 * r * r / (3 * s * s)) * math.exp(-math.sqrt(5) * r / s)
    np.testing.assert_allclose(kernel_eval(spec, [0.0], [r]), expected, rtol=1e-14)


def test_kernel_dimension_mismatch():
    with pytest.raises(DataError):
        kernel_eval(KernelSpec(RBF, 1.0), [0.0, 1.0], [0.0])


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("laplace")
    with pytest.raises(ValueError):
        KernelSpec(RBF, -1.0)


@given(st.sampled_from([RBF, MATERN25]), arrays(np.float64, 3, elements=st.floats(-5, 5)), arrays(np.float64, 3, elements=st.floats(-5, 5)))
@settings(max_examples=50, deadline=None)
def test_kernel_values_in_unit_interval(family, x, y):
    v = kernel_eval(KernelSpec(family, 1.3), x, y)
    assert 0 < v <= 1
    assert kernel_eval(KernelSpec(family, 1.3), x, x) == 1.0


def test_median_two_points():
    assert median_heuristic_bandwidth([[0.0, 0.0], [2.0, 0.0]]) == 2.0


def test_median_three_points():
    assert median_heuristic_bandwidth([[0.0], [1.0], [3.0]]) == 2.0


def test_median_degenerate_pool():
    with pytest.raises(DataError, match="degenerate pool"):
        median_heuristic_bandwidth(np.ones((5, 2)))


def test_median_zero_falls_back_to_smallest_nonzero():
    pool = np.array([[0.0]] * 4 + [[0.5], [2.0]])
    assert median_heuristic_bandwidth(pool) == 0.5


def test_median_needs_two_samples():
    with pytest.raises(DataError):
        median_heuristic_bandwidth([[1.0, 2.0]])


@given(st.integers(0, 2**32 - 1), st.sampled_from([40, 5000]))
@settings(max_examples=6, deadline=None)
def test_median_permutation_invariant(seed, size):
    rng = np.random.default_rng(seed)
    pool = rng.normal(size=(size, 2))
    perm = rng.permutation(size)
    assert median_heuristic_bandwidth(pool) == median_heuristic_bandwidth(pool[perm])


def test_constant_kernel_gives_zero():
    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(30, 2)), rng.normal(3, 1, size=(20, 2))

    def const(A, B):
        return np.full((len(A), len(B)), 0.7)

    assert abs(mmd2_unbiased(X, Y, kernel=const).mmd2) <= 1e-12


def test_hand_example_1d():
    # within sums: e^-2 each; cross: distances 1, 3, 1, 1
    expected = 2 * math.exp(-2) - 0.5 * (3 * math.exp(-0.5) + math.exp(-4.5))
    res = mmd2_unbiased([[0.0], [2.0]], [[1.0], [3.0]], KernelSpec(RBF, 1.0))
    np.testing.assert_allclose(res.mmd2, expected, rtol=1e-13)
    np.testing.assert_allclose(res.mmd2, -0.644680, atol=1e-6)
    assert (res.n_x, res.n_y, res.bandwidth_used) == (2, 2, 1.0)


@given(
    st.integers(2, 8),
    st.integers(2, 8),
    st.integers(1, 3),
    st.sampled_from([RBF, MATERN25]),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=60, deadline=None)
def test_matches_naive_double_loop(n, m, d, family, seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(n, d)), rng.normal(0.5, 1.5, size=(m, d))
    res = mmd2_unbiased(X, Y, KernelSpec(family))
    ref = naive_mmd2(family, res.bandwidth_used, X.tolist(), Y.tolist())
    assert abs(res.mmd2 - ref) <= 1e-12


def test_tiled_sums_match_naive_on_larger_sets():
    rng = np.random.default_rng(5)
    X, Y = rng.normal(size=(300, 2)), rng.normal(size=(1100, 2))
    for family in (RBF, MATERN25):
        res = mmd2_unbiased(X, Y, KernelSpec(family, 0.8))
        Kxx, Kyy, Kxy = (kernel_matrix(family, 0.8, A, B) for A, B in ((X, X), (Y, Y), (X, Y)))
        ref = (Kxx.sum() - np.trace(Kxx)) / (300 * 299) + (Kyy.sum() - np.trace(Kyy)) / (1100 * 1099) - 2 * Kxy.mean()
        np.testing.assert_allclose(res.mmd2, ref, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from([RBF, MATERN25]))
@settings(max_examples=30, deadline=None)
def test_symmetry(seed, family):
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(15, 2)), rng.normal(1, 1, size=(11, 2))
    a = mmd2_unbiased(X, Y, KernelSpec(family)).mmd2
    b = mmd2_unbiased(Y, X, KernelSpec(family)).mmd2
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@given(st.integers(0, 2**32 - 1), st.sampled_from([RBF, MATERN25]))
@settings(max_examples=30, deadline=None)
def test_equal_multisets_nonpositive(seed, family):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 2))
    assert mmd2_unbiased(X, X[rng.permutation(12)], KernelSpec(family)).mmd2 <= 1e-12


def test_null_large_sample_near_zero():
    rng = np.random.default_rng(11)
    X, Y = rng.normal(size=(5000, 1)), rng.normal(size=(5000, 1))
    assert abs(mmd2_unbiased(X, Y, KernelSpec(RBF)).mmd2) < 0.005


def test_sample_count_errors():
    with pytest.raises(DataError):
        mmd2_unbiased([[0.0]], [[1.0], [2.0]])
    with pytest.raises(DataError):
        mmd2_unbiased(np.zeros((3, 2)), np.zeros((3, 1)))


def test_permutation_pvalue_calibrated_under_null():
    ok = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X, Y = rng.normal(size=(60, 1)), rng.normal(size=(60, 1))
        ok += mmd_permutation_pvalue(X, Y, KernelSpec(RBF), 200, seed) > 0.01
    assert ok >= 19


def test_permutation_pvalue_minimum_under_strong_shift():
    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(500, 1)), rng.normal(3, 1, size=(500, 1))
    assert mmd_permutation_pvalue(X, Y, KernelSpec(RBF), 200, 1) == 1 / 201


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_single_permutation_pvalue_values(seed):
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(6, 1)), rng.normal(size=(7, 1))
    assert mmd_permutation_pvalue(X, Y, KernelSpec(MATERN25), 1, seed) in (0.5, 1.0)


def test_permutation_pvalue_requires_permutations():
    with pytest.raises(ValueError):
        mmd_permutation_pvalue([[0.0], [1.0]], [[0.0], [1.0]], KernelSpec(), 0, 0)
