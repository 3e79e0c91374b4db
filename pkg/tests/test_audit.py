import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdsim.audit import (audit, check_connectivity, counterexample_matrix, tightness_fixture)
from gdsim.diffusion import Variant, similarity_matrix
from gdsim.graph import from_dense, row_sum_ratio

from _instances import is_connected, random_categorical, random_dense, rescale_rows, rng_for


def test_counterexample_forward_and_reversed():
    w = counterexample_matrix()
    fwd = audit(w, Variant("forward", 1))
    assert fwd.worst_triangle == pytest.approx(-1 / 6, abs=1e-12)
    assert fwd.witness == (0, 1, 2)
    rev = audit(w, Variant("reversed", 1))
    assert rev.worst_triangle == pytest.approx(-1 / 6, abs=1e-12)
    assert rev.witness == (2, 1, 0)
    assert fwd.p_ratio == pytest.approx(1 / 12) and not fwd.ratio_condition
    assert fwd.connected and fwd.n_components == 1
    assert fwd.exhaustive and fwd.triples_checked == 27
    assert fwd.stochasticity_defect <= 1e-15
    assert rev.stochasticity_defect <= 1e-15


def test_report_format_has_both_layouts():
    text = audit(counterexample_matrix(), Variant("forward", 1)).format()
    assert "worst_triangle=-0.16666666666666663" in text
    assert "witness=0,1,2" in text
    assert any(line.startswith("worst_triangle ") for line in text.splitlines())


def test_tightness_fixture():
    fx = tightness_fixture()
    assert fx.bound == pytest.approx(2 / 3, abs=1e-12)
    assert fx.similarities[(0, 1)] == pytest.approx(1 / 3, abs=1e-12)
    assert fx.similarities[(1, 2)] == pytest.approx(1 / 3, abs=1e-12)
    assert fx.similarities[(0, 2)] == pytest.approx(0.0, abs=1e-12)
    assert fx.slack == pytest.approx(1 / 3, abs=1e-12)
    with pytest.raises(ValueError):
        tightness_fixture(extra_rows=((1, 0, 0),))


def test_tightness_bound_ignores_extra_rows():
    assert tightness_fixture(extra_rows=((0, 0, 0.2, 0.3, 0.5),)).bound == pytest.approx(2 / 3)


def test_connectivity_examples():
    assert check_connectivity(from_dense(np.eye(2))) == (False, [[0], [1]])
    assert check_connectivity(from_dense([[1], [1]])) == (True, [[0, 1]])
    assert check_connectivity(counterexample_matrix())[0]


def test_connectivity_matches_scipy():
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components
    for seed in range(200):
        W = random_dense(rng_for(seed), n_max=10, m_max=8, density=0.15)
        n, m = W.shape
        ok, comps = check_connectivity(from_dense(W))
        A = np.zeros((n + m, n + m))
        A[:n, n:] = W > 0
        A = A + A.T
        _, lab = connected_components(csr_matrix(A), directed=False)
        assert ok == is_connected(W)
        assert len(comps) == len(set(lab[:n].tolist()))
        for g in comps:
            assert len({lab[i] for i in g}) == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3, 5]))
def test_normalized_variant_is_metametric(seed, k):
    w = from_dense(random_dense(rng_for(seed)))
    r = audit(w, Variant("normalized", k))
    assert r.symmetry_defect <= 1e-12
    assert r.worst_triangle >= -1e-12
    assert r.nonneg_ok and r.zero_distance_ok


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_first_order_triangle_holds_above_ratio_threshold(seed):
    rng = rng_for(seed)
    W = rescale_rows(random_dense(rng), rng, 2 / 3 + 1e-9)
    w = from_dense(W)
    assert row_sum_ratio(w) > 2 / 3
    for kind in ("forward", "reversed"):
        r = audit(w, Variant(kind, 1))
        assert r.ratio_condition
        assert r.worst_triangle >= -1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["forward", "reversed", "normalized"]),
       st.integers(1, 4))
def test_one_hot_instances_are_metametric(seed, kind, k):
    W, _ = random_categorical(rng_for(seed))
    r = audit(from_dense(W), Variant(kind, k))
    assert r.symmetry_defect <= 1e-12
    assert r.worst_triangle >= -1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["forward", "reversed"]), st.integers(1, 4))
def test_zero_distance_only_for_isolated_objects(seed, kind, k):
    W = random_dense(rng_for(seed), density=0.2)
    w = from_dense(W)
    r = audit(w, Variant(kind, k))
    assert r.zero_distance_ok
    D = 1 - similarity_matrix(w, Variant(kind, k))
    _, comps = check_connectivity(w)
    singles = {g[0] for g in comps if len(g) == 1}
    for i, j in zip(*np.nonzero(D <= 1e-12)):
        assert i == j and i in singles


def test_zero_distance_detected_on_identity():
    r = audit(from_dense(np.eye(3)), Variant("forward", 2))
    assert r.zero_distance_ok and r.n_components == 3 and not r.connected


def test_sampled_mode_finds_counterexample_violation():
    r = audit(counterexample_matrix(), Variant("forward", 1), sample=500, seed=3)
    assert not r.exhaustive and r.triples_checked == 500 and r.seed == 3
    assert r.worst_triangle == pytest.approx(-1 / 6, abs=1e-12)
    assert r.witness == (0, 1, 2)
    again = audit(counterexample_matrix(), Variant("forward", 1), sample=500, seed=3)
    assert again == r


def test_sampled_mode_above_cap():
    rng = rng_for(0)
    W = random_dense(rng, n_max=40, n_min=40, m_max=6)
    full = audit(from_dense(W), Variant("forward", 2))
    samp = audit(from_dense(W), Variant("forward", 2), cap=10, sample=2000, seed=1)
    assert not samp.exhaustive
    assert samp.worst_triangle >= full.worst_triangle - 1e-15
    assert samp.symmetry_defect <= full.symmetry_defect + 1e-15


def test_exhaustive_scan_is_thread_independent():
    W = random_dense(rng_for(4), n_max=30, n_min=30)
    reports = [audit(from_dense(W), Variant("forward", 1), threads=t) for t in (1, 3, 8)]
    assert reports[0] == reports[1] == reports[2]
