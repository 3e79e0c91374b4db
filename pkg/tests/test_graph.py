import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdsim.errors import DataError
from gdsim.graph import (build, from_dense, make_operator, read_triplets, row_normalize,
                         row_sum_ratio, write_dense, write_triplets)

from _instances import random_dense, random_matrix, rng_for, is_connected

EXAMPLE_ROW = [3, 5, 0, 2, 0]


def example_matrix():
    # object 0 is the highlighted object; the other rows make every feature reachable
    return from_dense([EXAMPLE_ROW, [0, 1, 4, 0, 0], [2, 0, 0, 1, 3], [0, 0, 1, 0, 2]])


def test_build_row_sums_example_object():
    assert example_matrix().p[0] == 10


def test_build_counterexample_sums():
    w = from_dense([[1, 0], [2, 6], [0, 12]])
    np.testing.assert_array_equal(w.p, [1, 8, 12])
    np.testing.assert_array_equal(w.q, [3, 18])
    assert w.sums_consistent()


def test_build_single_entry():
    w = build([(0, 0, 1.0)], 1, 1)
    assert w.p.tolist() == [1.0] and w.q.tolist() == [1.0]


@pytest.mark.parametrize("entries, msg", [
    ([(0, 0, -1.0)], "negative"),
    ([(0, 0, 1.0), (0, 0, 2.0)], "duplicate"),
    ([(0, 0, 1.0)], "null object"),  # object 1 is empty
    ([(0, 5, 1.0), (1, 0, 1.0)], "out of range"),
    ([(0, 0, float("nan")), (1, 0, 1.0)], "finite"),
])
def test_build_errors(entries, msg):
    with pytest.raises(DataError, match=msg):
        build(entries, 2, 2)


def test_build_accepts_array_triplets_and_drops_zero_weights():
    with pytest.warns(RuntimeWarning, match="dropping 1"):
        w = build((np.array([0, 1, 1]), np.array([0, 0, 1]), np.array([1.0, 2.0, 0.0])), 2, 2)
    assert w.m == 1 and w.nnz == 2
    assert w.feature_ids.tolist() == [0]


def test_zero_column_is_remapped():
    with pytest.warns(RuntimeWarning):
        w = from_dense([[1, 0, 2], [0, 0, 3]])
    assert w.m == 2
    np.testing.assert_array_equal(w.toarray(), [[1, 2], [0, 3]])
    np.testing.assert_array_equal(w.feature_ids, [0, 2])
    with pytest.raises(DataError):
        from_dense([[1, 0], [1, 0]], drop_zero_columns=False)


def test_row_normalize_examples():
    w = row_normalize(example_matrix())
    np.testing.assert_allclose(w.toarray()[0], [0.3, 0.5, 0, 0.2, 0], rtol=0, atol=1e-15)
    np.testing.assert_allclose(row_normalize(from_dense([[2, 6]])).toarray(), [[0.25, 0.75]])
    again = row_normalize(w)
    np.testing.assert_array_equal(again.data, w.data)
    np.testing.assert_array_equal(again.indices, w.indices)
    np.testing.assert_allclose(w.p, 1.0)


def test_operator_examples():
    S = make_operator(from_dense([[1, 0], [2, 6], [0, 12]])).matrix()
    np.testing.assert_allclose(S[0], [1 / 3, 2 / 3, 0], atol=1e-15)
    np.testing.assert_allclose(S[1], [1 / 12, 5 / 12, 1 / 2], atol=1e-15)
    np.testing.assert_allclose(make_operator(from_dense([[1], [1]])).matrix(), 0.5)


@pytest.mark.parametrize("storage", ["sparse", "dense"])
def test_push_and_pull_agree_with_dense_product(storage):
    for seed in range(20):
        W = random_dense(rng_for(seed))
        P, Q = W.sum(1), W.sum(0)
        S = (W / P[:, None]) @ (W / Q).T
        op = make_operator(from_dense(W), storage=storage)
        x = rng_for(seed + 1000).random(W.shape[0])
        np.testing.assert_allclose(op.push(x), x @ S, atol=1e-13)
        np.testing.assert_allclose(op.pull(x), S @ x, atol=1e-13)


def test_storage_auto_threshold():
    assert make_operator(from_dense(np.ones((3, 3)))).dense
    assert not make_operator(from_dense(np.eye(4))).dense


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_stochastic_and_positive_diagonal(seed):
    w = random_matrix(seed)
    S = make_operator(w).matrix()
    np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(np.diag(S) > 0)
    assert np.all(S >= 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_row_normalized_operator_is_symmetric(seed):
    S = make_operator(row_normalize(random_matrix(seed))).matrix()
    assert np.max(np.abs(S - S.T)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_equal_row_sums_iff_symmetric(seed):
    rng = rng_for(seed)
    W = random_dense(rng)
    if rng.random() < 0.5:
        W = W / W.sum(axis=1, keepdims=True) * rng.uniform(0.5, 3)
    w = from_dense(W)
    S = make_operator(w).matrix()
    symmetric = np.max(np.abs(S - S.T)) <= 1e-12
    equal = abs(row_sum_ratio(w) - 1.0) <= 1e-12
    if equal:
        assert symmetric
    if is_connected(W) and symmetric:
        assert equal


def test_row_sum_ratio_examples():
    assert row_sum_ratio(from_dense([[1, 0], [2, 6], [0, 12]])) == pytest.approx(1 / 12)
    assert row_sum_ratio(from_dense([[3, 0], [0, 2.5]])) == pytest.approx(2.5 / 3)
    assert row_sum_ratio(from_dense(np.eye(3))) == 1.0


def test_triplet_and_dense_round_trip(tmp_path):
    w = random_matrix(7)
    write_triplets(tmp_path / "w.txt", w, header=["demo"])
    back = read_triplets(tmp_path / "w.txt")
    np.testing.assert_array_equal(back.toarray(), w.toarray())
    write_dense(tmp_path / "w.csv", w)
    np.testing.assert_array_equal(np.loadtxt(tmp_path / "w.csv", delimiter=","), w.toarray())


def test_read_triplets_reports_bad_lines(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("0 0 1\n1 x 2\n")
    with pytest.raises(DataError):
        read_triplets(f)


def test_feature_matrix_is_read_only():
    w = random_matrix(3)
    with pytest.raises(ValueError):
        w.data[0] = 5.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert w.sums_consistent()
