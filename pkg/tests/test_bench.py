import numpy as np

from gdsim import bench


def test_random_instance_shape_and_density():
    w = bench.random_instance(500, 50, 8, seed=1)
    assert w.n == 500 and w.nnz == 500 * 8
    assert np.all(np.diff(w.indptr) == 8)
    again = bench.random_instance(500, 50, 8, seed=1)
    np.testing.assert_array_equal(w.data, again.data)


def test_scaling_exponent_of_exact_power_law():
    ns = np.array([1e4, 2e4, 4e4])
    assert abs(bench.scaling_exponent(ns, 3e-7 * ns ** 1.1) - 1.1) < 1e-12


def test_small_run_report():
    rows, exps = bench.run(sizes=(1000, 2000), queries=4, repeats=1, backends=["numpy"])
    assert [r.n for r in rows] == [1000, 2000]
    assert set(exps) == {"numpy"}
    text = bench.format_report(rows, exps)
    assert text.splitlines()[0] == "n\tm\tnnz\tbackend\tus_per_query"
    assert "# exponent[numpy]=" in text
