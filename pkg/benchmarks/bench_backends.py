"""Compare the numba kernels with their numpy fallbacks.

Times the sparse push (one diffusion query), a batch of walk steps and the
exhaustive triangle scan on the same inputs for both backends, and checks
that the two produce the same numbers.

    python benchmarks/bench_backends.py [--n 20000] [--repeats 5]
"""

import argparse
import sys
import time

import numpy as np

from gdsim import _accel, _kernels, bench
from gdsim.diffusion import forward_row
from gdsim.graph import make_operator
from gdsim.oracle import _cumulative


def best_of(fn, repeats):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--per-row", type=int, default=8)
    ap.add_argument("--walks", type=int, default=200_000)
    ap.add_argument("--audit-n", type=int, default=300)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    w = bench.random_instance(args.n, max(args.per_row, args.n // 10), args.per_row, seed=0)
    rng = np.random.Generator(np.random.PCG64(0))
    queries = rng.integers(0, w.n, 32)
    cum = _cumulative(w.indptr, w.data)
    nodes = rng.integers(0, w.n, args.walks)
    u = rng.random(args.walks)
    D = rng.random((args.audit_n, args.audit_n))

    results = {}
    for be in ("numba", "numpy"):
        op = make_operator(w, storage="sparse", backend=be)
        rows = []
        t_query = best_of(lambda: rows.append([forward_row(op, int(i), 2).scores for i in queries]),
                          args.repeats) / queries.size
        t_walk = best_of(lambda: _kernels.walk_step(w.indptr, w.indices, cum, nodes, u, backend=be),
                         args.repeats)
        t_scan = best_of(lambda: _kernels.triangle_scan(D, backend=be), max(1, args.repeats // 2))
        results[be] = dict(query=t_query, walk=t_walk, scan=t_scan, rows=rows[-1],
                           steps=_kernels.walk_step(w.indptr, w.indices, cum, nodes, u, backend=be),
                           tri=_kernels.triangle_scan(D, backend=be))

    a, b = results["numba"], results["numpy"]
    row_err = max(np.max(np.abs(x - y)) for x, y in zip(a["rows"], b["rows"]))
    print(f"instance: n={w.n} m={w.m} nnz={w.nnz}; walks={args.walks}; scan n={args.audit_n}")
    print(f"{'kernel':<24}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for key, label, unit, scale in (("query", "query (k=2)", "us", 1e6),
                                    ("walk", "walk step batch", "ms", 1e3),
                                    ("scan", "triangle scan", "ms", 1e3)):
        print(f"{label:<24}{a[key] * scale:>10.1f}{unit}{b[key] * scale:>10.1f}{unit}"
              f"{b[key] / a[key]:>9.1f}x")
    print(f"max |row difference|      {row_err:.3g}")
    print(f"walk steps identical      {np.array_equal(a['steps'], b['steps'])}")
    print(f"triangle scans identical  {a['tri'] == b['tri']}")


if __name__ == "__main__":
    main()
