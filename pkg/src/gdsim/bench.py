"""Per-query timing across doubling ``n``, for both kernel backends."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import _accel
from .diffusion import forward_row, reversed_row
from .graph import build, make_operator

DEFAULT_SIZES = (10_000, 20_000, 40_000)


def random_instance(n, m, per_row, seed=0):
    """``n`` objects with ``per_row`` distinct features each, weights in (0, 1]."""
    rng = np.random.Generator(np.random.PCG64(seed))
    cols = np.argsort(rng.random((n, m)), axis=1)[:, :per_row] if m <= 64 else \
        np.stack([rng.choice(m, per_row, replace=False) for _ in range(n)])
    rows = np.repeat(np.arange(n), per_row)
    vals = 1.0 - rng.random(n * per_row)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return build((rows, cols.ravel(), vals), n, m)


@dataclass(frozen=True)
class BenchRow:
    n: int
    m: int
    nnz: int
    backend: str
    seconds_per_query: float


def time_queries(w, k=2, queries=64, repeats=7, seed=0, backend=None, kind="forward"):
    """Mean time of one ``k``-round query, best of ``repeats`` passes.

    The minimum is the least noisy estimate of the cost itself; slower passes
    only add scheduler and cache interference.
    """
    op = make_operator(w, storage="sparse", backend=backend)
    rng = np.random.Generator(np.random.PCG64(seed))
    qs = rng.integers(0, w.n, size=queries)
    fn = reversed_row if kind == "reversed" else forward_row
    fn(op, int(qs[0]), k)  # warm-up / JIT compile
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for i in qs:
            fn(op, int(i), k)
        samples.append((time.perf_counter() - t0) / queries)
    return float(np.min(samples))


def scaling_exponent(ns, times) -> float:
    """Slope of ``log t`` against ``log n``."""
    return float(np.polyfit(np.log(ns), np.log(times), 1)[0])


def run(sizes=DEFAULT_SIZES, per_row=8, feature_ratio=0.1, k=2, queries=64, repeats=7,
        seed=0, backends=None):
    """Time per-query similarity on random fixed-density instances.

    Returns ``(rows, exponents)`` where ``exponents`` maps backend to the
    fitted scaling exponent.
    """
    if backends is None:
        backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]
    rows = []
    for n in sizes:
        m = max(per_row, int(n * feature_ratio))
        w = random_instance(n, m, per_row, seed)
        for be in backends:
            t = time_queries(w, k, queries, repeats, seed, backend=be)
            rows.append(BenchRow(n, w.m, w.nnz, be, t))
    exps = {}
    for be in backends:
        sel = [r for r in rows if r.backend == be]
        exps[be] = scaling_exponent([r.n for r in sel], [r.seconds_per_query for r in sel])
    return rows, exps


def format_report(rows, exps) -> str:
    lines = ["n\tm\tnnz\tbackend\tus_per_query"]
    for r in rows:
        lines.append(f"{r.n}\t{r.m}\t{r.nnz}\t{r.backend}\t{r.seconds_per_query * 1e6:.1f}")
    for be, e in exps.items():
        lines.append(f"# exponent[{be}]={e:.3f}")
    return "\n".join(lines) + "\n"
