import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairscan.core import (
    CONTROL,
    Condition,
    DataError,
    ExperimentDataset,
    RelationSet,
    ScoreMatrix,
    all_pairs,
    canonical_pair,
    derive_rng,
    make_rng,
)


def test_double_is_canonicalised():
    assert Condition.double(3, 1) == Condition.double(1, 3)
    assert Condition.double(3, 1).indices == (1, 3)


def test_self_double_rejected():
    with pytest.raises(DataError):
        Condition.double(2, 2)


def test_condition_record_roundtrip():
    for c in (CONTROL, Condition.single(4), Condition.double(0, 5)):
        assert Condition.from_record(c.to_record()) == c


def test_condition_ordering_puts_control_first():
    conds = [Condition.double(0, 1), Condition.single(2), CONTROL, Condition.single(0)]
    assert sorted(conds) == [CONTROL, Condition.single(0), Condition.single(2), Condition.double(0, 1)]


def test_unknown_record_kind():
    with pytest.raises(DataError, match="unknown condition kind"):
        Condition.from_record({"kind": "triple"})


def test_all_pairs_count_and_order():
    pairs = all_pairs(50)
    assert len(pairs) == 1225
    assert pairs == sorted(pairs)
    assert all(i < j for i, j in pairs)


def _small_dataset(rng, dim=3):
    return {
        CONTROL: rng.normal(size=(10, dim)),
        Condition.single(0): rng.normal(size=(10, dim)),
        Condition.single(1): rng.normal(size=(10, dim)),
        Condition.double(0, 1): rng.normal(size=(10, dim)),
    }


def test_dataset_requires_control():
    rng = np.random.default_rng(0)
    samples = _small_dataset(rng)
    del samples[CONTROL]
    with pytest.raises(DataError, match="control condition absent"):
        ExperimentDataset(2, samples)


def test_dataset_rejects_mixed_dimensions():
    rng = np.random.default_rng(0)
    samples = _small_dataset(rng)
    samples[Condition.single(1)] = rng.normal(size=(10, 2))
    with pytest.raises(DataError, match="dimension"):
        ExperimentDataset(2, samples)


def test_dataset_rejects_nonfinite():
    rng = np.random.default_rng(0)
    samples = _small_dataset(rng)
    samples[Condition.single(0)][4, 1] = np.nan
    with pytest.raises(DataError, match="row 4"):
        ExperimentDataset(2, samples)


def test_dataset_rejects_out_of_range_index():
    rng = np.random.default_rng(0)
    samples = _small_dataset(rng)
    samples[Condition.single(5)] = rng.normal(size=(10, 3))
    with pytest.raises(DataError, match="n_perturbations"):
        ExperimentDataset(2, samples)


def test_dataset_arrays_are_read_only():
    ds = ExperimentDataset(2, _small_dataset(np.random.default_rng(0)))
    with pytest.raises(ValueError):
        ds[CONTROL][0, 0] = 1.0


def test_dataset_require_lists_missing():
    ds = ExperimentDataset(2, _small_dataset(np.random.default_rng(0)))
    with pytest.raises(DataError, match=r"double\(0,2\)"):
        ds.require(CONTROL, Condition.double(0, 2))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_every_condition_has_dataset_dimension(dim, seed):
    ds = ExperimentDataset(2, _small_dataset(np.random.default_rng(seed), dim))
    assert all(ds[c].shape[1] == ds.dim == dim for c in ds.conditions)


@st.composite
def score_matrices(draw):
    n = draw(st.integers(2, 7))
    pairs = all_pairs(n)
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    vals = draw(st.lists(st.floats(-1e6, 1e6), min_size=len(pairs), max_size=len(pairs)))
    return ScoreMatrix(n, {p: v for p, m, v in zip(pairs, mask, vals) if m})


@given(score_matrices())
@settings(max_examples=50, deadline=None)
def test_score_matrix_symmetric_access(m):
    for i, j in m.observed():
        assert m.get(i, j) == m.get(j, i)
        assert m.is_observed(j, i)
    D = m.to_dense()
    np.testing.assert_array_equal(D, D.T)


def test_score_matrix_from_dense_uses_upper_triangle():
    R = np.arange(16.0).reshape(4, 4)
    m = ScoreMatrix.from_dense(R)
    assert m.is_complete()
    assert m.get(2, 1) == R[1, 2]


def test_score_matrix_rejects_nonfinite():
    with pytest.raises(DataError):
        ScoreMatrix(3, {(0, 1): np.inf})


def test_score_matrix_with_entries_is_new_value():
    m = ScoreMatrix(3, {(0, 1): 1.0})
    m2 = m.with_entries({(2, 1): 4.0})
    assert m.n_observed() == 1 and m2.n_observed() == 2
    assert m2.get(1, 2) == 4.0


def test_relation_set_canonical():
    rel = RelationSet([(3, 1), (1, 3), (0, 2)])
    assert rel == {(1, 3), (0, 2)}
    assert rel.count_in([(2, 0), (1, 2)]) == 1


def test_rng_streams_reproducible():
    a = make_rng(7).standard_normal(5)
    b = make_rng(7).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert isinstance(make_rng(7).bit_generator, np.random.PCG64)


def test_derived_streams_independent_of_call_order():
    x = derive_rng(3, 1, 2).random()
    derive_rng(3, 0, 1).random()
    assert derive_rng(3, 1, 2).random() == x
    assert derive_rng(3, 2, 1).random() != x


def test_rng_requires_seed():
    with pytest.raises(ValueError):
        make_rng(None)


def test_canonical_pair():
    assert canonical_pair(5, 2) == (2, 5)
