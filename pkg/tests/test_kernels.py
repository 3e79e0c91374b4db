import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gdsim import _accel, _kernels
from gdsim.graph import make_operator
from gdsim.oracle import _cumulative, simulate

from _instances import random_matrix, rng_for

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scatter_and_gather_backends_agree(seed):
    w = random_matrix(seed, n_max=30, m_max=12)
    x = rng_for(seed).random(w.n)
    a = _kernels.scatter(w.indptr, w.indices, w.data, x, w.m, backend="numba")
    b = _kernels.scatter(w.indptr, w.indices, w.data, x, w.m, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)
    v = rng_for(seed + 1).random(w.m)
    a = _kernels.gather(w.indptr, w.indices, w.data, v, backend="numba")
    b = _kernels.gather(w.indptr, w.indices, w.data, v, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)


def _dense_slack_min(D):
    n = D.shape[0]
    best, arg = np.inf, None
    for i in range(n):
        for j in range(n):
            for k in range(n):
                s = (D[i, j] + D[j, k]) - D[i, k]
                if s < best:
                    best, arg = s, (i, j, k)
    return best, arg


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_triangle_scan_matches_brute_force(backend):
    if backend == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    for seed in range(40):
        rng = rng_for(seed)
        n = int(rng.integers(1, 9))
        D = np.round(rng.random((n, n)), 1)  # rounding creates ties
        best, arg = _dense_slack_min(D)
        got = _kernels.triangle_scan(D, backend=backend)
        assert got[0] == best and tuple(got[1:]) == arg
        lo, hi = n // 3, n
        sub = _kernels.triangle_scan(D, lo, hi, backend=backend)
        if lo < hi:
            assert sub[1] >= lo


@needs_numba
def test_walk_step_backends_are_bitwise_identical():
    w = random_matrix(4, n_max=20, m_max=10)
    cum = _cumulative(w.indptr, w.data)
    rng = rng_for(0)
    nodes = rng.integers(0, w.n, 5000)
    u = rng.random(5000)
    u[:3] = [0.0, np.nextafter(1.0, 0.0), 0.5]
    a = _kernels.walk_step(w.indptr, w.indices, cum, nodes, u, backend="numba")
    b = _kernels.walk_step(w.indptr, w.indices, cum, nodes, u, backend="numpy")
    np.testing.assert_array_equal(a, b)
    # every chosen feature must actually carry weight for the node
    for node, s in zip(nodes[:200], a[:200]):
        assert s in w.indices[w.indptr[node]:w.indptr[node + 1]]


@needs_numba
def test_simulation_backends_are_bitwise_identical():
    w = random_matrix(9)
    a = simulate(w, 0, 3, 40_000, seed=5, backend="numba")
    b = simulate(w, 0, 3, 40_000, seed=5, backend="numpy")
    np.testing.assert_array_equal(a.hits, b.hits)


@needs_numba
def test_operator_backends_agree():
    w = random_matrix(21, n_max=40, m_max=15)
    x = rng_for(1).random(w.n)
    a = make_operator(w, storage="sparse", backend="numba")
    b = make_operator(w, storage="sparse", backend="numpy")
    np.testing.assert_allclose(a.push(x), b.push(x), rtol=1e-13)
    np.testing.assert_allclose(a.pull(x), b.pull(x), rtol=1e-13)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _kernels._pick("fortran")


def test_env_flag_selects_numpy_fallback():
    env = dict(os.environ, GDSIM_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from gdsim import _accel; print(_accel.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["GDSIM_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", "from gdsim import _accel; print(_accel.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == ("numba" if _accel.HAVE_NUMBA else "numpy")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_numpy_scatter_sparse_path_is_bitwise_identical(seed):
    w = random_matrix(seed, n_max=40, m_max=12)
    rng = rng_for(seed)
    x = np.zeros(w.n)
    active = rng.choice(w.n, max(1, w.n // 6), replace=False)
    x[active] = rng.random(active.size)
    full = np.bincount(w.indices, weights=np.repeat(x, np.diff(w.indptr)) * w.data, minlength=w.m)
    np.testing.assert_array_equal(_kernels.scatter(w.indptr, w.indices, w.data, x, w.m,
                                                   backend="numpy"), full)
