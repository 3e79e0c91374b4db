"""Monte-Carlo simulation of the particle walk on the bipartite graph.

A walker at object ``i`` moves to feature ``s`` with probability
``w_is / p_i`` and from feature ``s`` to object ``j`` with probability
``w_js / q_s``; two such steps make one round. The empirical end-point
distribution after ``k`` rounds estimates row ``i`` of ``S**k`` without ever
touching the matrix algebra, so it serves as an independent check of
:mod:`gdsim.diffusion`.

Walks run in fixed-size batches; batch ``b`` draws its uniforms from
``SeedSequence(seed, spawn_key=(b,))``, so the result depends only on the seed
and never on the number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .diffusion import SimilarityVector
from .graph import FeatureMatrix
from .parallel import pmap

BATCH = 16_384


@dataclass(frozen=True, eq=False)
class WalkEstimate:
    start: object
    rounds: int
    num_walks: int
    hits: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray
    seed: int


def _cumulative(indptr, data):
    """Per-row ``row + cumsum / rowsum``, last entry of each row exactly ``row + 1``."""
    nrows = len(indptr) - 1
    rows = np.repeat(np.arange(nrows), np.diff(indptr))
    csum = np.cumsum(data)
    base = np.concatenate(([0.0], csum[indptr[1:-1] - 1]))
    within = csum - base[rows]
    totals = within[indptr[1:] - 1]
    cum = rows + within / totals[rows]
    cum[indptr[1:] - 1] = np.arange(1, nrows + 1, dtype=np.float64)
    return cum


@lru_cache(maxsize=8)
def _tables(w: FeatureMatrix):
    c_indptr, c_rows, c_data = w.csc()
    obj = (w.indptr, w.indices, _cumulative(w.indptr, w.data))
    feat = (c_indptr, c_rows, _cumulative(c_indptr, c_data))
    return obj, feat


def _batch_rng(seed, b):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))


def _run_batch(w, starts, rounds, steps_per_round, seed, b, backend):
    obj, feat = _tables(w)
    rng = _batch_rng(seed, b)
    u = rng.random((rounds * steps_per_round, starts.size))
    nodes = starts
    for r in range(rounds):
        feats = _kernels.walk_step(*obj, nodes, u[steps_per_round * r], backend=backend)
        if steps_per_round == 1:
            nodes = feats
            continue
        nodes = _kernels.walk_step(*feat, feats, u[steps_per_round * r + 1], backend=backend)
    return nodes


def _starts(w, start, num_walks):
    if np.isscalar(start):
        if not 0 <= int(start) < w.n:
            raise IndexError(f"start {start} out of range [0, {w.n})")
        return np.full(num_walks, int(start), dtype=np.int64)
    starts = np.asarray(start, dtype=np.int64)
    if starts.min() < 0 or starts.max() >= w.n:
        raise IndexError("start index out of range")
    return starts


def _estimate(hits, num_walks):
    est = hits / float(num_walks)
    return est, np.sqrt(est * (1.0 - est) / num_walks)


def _simulate(w, start, rounds, num_walks, seed, threads, backend, steps_per_round, size):
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if np.isscalar(start) and num_walks < 1:
        raise ValueError("num_walks must be >= 1")
    starts = _starts(w, start, num_walks)
    if starts.size == 0:
        raise ValueError("no start positions given")
    num_walks = starts.size
    bounds = [(b, lo, min(lo + BATCH, num_walks))
              for b, lo in enumerate(range(0, num_walks, BATCH))]
    ends = pmap(lambda t: _run_batch(w, starts[t[1]:t[2]], rounds, steps_per_round,
                                     seed, t[0], backend), bounds, threads)
    hits = np.zeros(size, dtype=np.int64)
    for e in ends:
        hits += np.bincount(e, minlength=size)
    est, se = _estimate(hits, num_walks)
    return WalkEstimate(start, rounds, num_walks, hits, est, se, seed)


def simulate(w: FeatureMatrix, start, rounds: int, num_walks: int, seed: int = 0, *,
             threads=None, backend=None) -> WalkEstimate:
    """Simulate ``num_walks`` walks of ``rounds`` rounds.

    ``start`` is one object index, or an array giving every walk its own start
    (then ``num_walks`` is ignored and may be ``None``).
    """
    return _simulate(w, start, rounds, num_walks, seed, threads, backend, 2, w.n)


def first_step(w: FeatureMatrix, start: int, num_walks: int, seed: int = 0, *,
               threads=None, backend=None) -> WalkEstimate:
    """Feature distribution after the first half-step from ``start``."""
    return _simulate(w, start, 1, num_walks, seed, threads, backend, 1, w.m)


def endpoints(est: WalkEstimate) -> np.ndarray:
    """Per-walk end positions in index order (to continue the walks)."""
    return np.repeat(np.arange(est.hits.size), est.hits)


def compare(est: WalkEstimate, exact) -> float:
    """Largest ``|estimate - exact| / se`` over entries.

    ``se = sqrt(exact (1 - exact) / num_walks)`` is the binomial standard error
    under the exact probabilities. Where it is zero (``exact`` is 0 or 1)
    the estimate must match exactly, otherwise the result is ``inf``.
    """
    exact = exact.scores if isinstance(exact, SimilarityVector) else np.asarray(exact, float)
    if exact.shape != est.estimate.shape:
        raise ValueError(f"shape mismatch: {est.estimate.shape} vs {exact.shape}")
    diff = np.abs(est.estimate - exact)
    se = np.sqrt(np.clip(exact * (1.0 - exact), 0.0, None) / est.num_walks)
    degenerate = se < 1e-15
    if np.any(diff[degenerate] > 1e-12):
        return float("inf")
    if not np.any(~degenerate):
        return 0.0
    return float(np.max(diff[~degenerate] / se[~degenerate]))
