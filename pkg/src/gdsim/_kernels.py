"""Inner loops: sparse pushes, walk stepping and the triangle scan.

Each kernel exists twice, a ``*_nb`` loop compiled with numba and a ``*_np``
vectorised numpy version. The public wrappers pick one according to
``gdsim._accel.USE_NUMBA`` unless ``backend`` is given explicitly.
"""

import numpy as np

from . import _accel
from ._accel import njit


def _pick(backend):
    if backend is None:
        return "numba" if _accel.USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# --------------------------------------------------------------------------
# x^T M for CSR M: each stored entry scatters x[row] * value into its column.


@njit
def _scatter_nb(indptr, indices, data, x, ncols):
    out = np.zeros(ncols)
    for r in range(indptr.shape[0] - 1):
        xr = x[r]
        if xr == 0.0:
            continue
        for e in range(indptr[r], indptr[r + 1]):
            out[indices[e]] += xr * data[e]
    return out


def _scatter_np(indptr, indices, data, x, ncols):
    nz = np.flatnonzero(x)
    if 4 * nz.size < x.size:
        # few active rows (early rounds of a query): touch only their entries
        lens = indptr[nz + 1] - indptr[nz]
        shift = indptr[nz] - np.concatenate(([0], np.cumsum(lens)[:-1]))
        pos = np.repeat(shift, lens) + np.arange(lens.sum())
        weights = np.repeat(x[nz], lens) * data[pos]
        return np.bincount(indices[pos], weights=weights, minlength=ncols).astype(np.float64)
    weights = np.repeat(x, np.diff(indptr)) * data
    return np.bincount(indices, weights=weights, minlength=ncols).astype(np.float64)


def scatter(indptr, indices, data, x, ncols, backend=None):
    if _pick(backend) == "numba":
        return _scatter_nb(indptr, indices, data, x, ncols)
    return _scatter_np(indptr, indices, data, x, ncols)


# --------------------------------------------------------------------------
# M v for CSR M. Rows are never empty (validated upstream).


@njit
def _gather_nb(indptr, indices, data, v):
    nrows = indptr.shape[0] - 1
    out = np.empty(nrows)
    for r in range(nrows):
        acc = 0.0
        for e in range(indptr[r], indptr[r + 1]):
            acc += data[e] * v[indices[e]]
        out[r] = acc
    return out


def _gather_np(indptr, indices, data, v):
    return np.add.reduceat(data * v[indices], indptr[:-1])


def gather(indptr, indices, data, v, backend=None):
    if _pick(backend) == "numba":
        return _gather_nb(indptr, indices, data, v)
    return _gather_np(indptr, indices, data, v)


# --------------------------------------------------------------------------
# One bipartite step for a batch of walkers.
#
# ``cum`` holds, per CSR row, ``row + cumsum(w) / sum(w)`` with the last entry
# of every row forced to exactly ``row + 1``. A walker at ``node`` with uniform
# ``u`` in [0, 1) moves to ``indices[e]`` for the first ``e`` in the row with
# ``cum[e] > node + u``. Both backends compare the same float values, so they
# agree bit for bit.


@njit
def _step_nb(indptr, indices, cum, nodes, uniforms):
    out = np.empty(nodes.shape[0], dtype=np.int64)
    for w in range(nodes.shape[0]):
        node = nodes[w]
        t = node + uniforms[w]
        lo = indptr[node]
        hi = indptr[node + 1] - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] > t:
                hi = mid
            else:
                lo = mid + 1
        out[w] = indices[lo]
    return out


def _step_np(indptr, indices, cum, nodes, uniforms):
    t = nodes + uniforms
    pos = np.searchsorted(cum, t, side="right")
    pos = np.minimum(pos, indptr[nodes + 1] - 1)
    return indices[pos].astype(np.int64)


def walk_step(indptr, indices, cum, nodes, uniforms, backend=None):
    if _pick(backend) == "numba":
        return _step_nb(indptr, indices, cum, nodes, uniforms)
    return _step_np(indptr, indices, cum, nodes, uniforms)


# --------------------------------------------------------------------------
# Exhaustive triangle scan over first indices [start, stop).
# Slack of (i, j, k) is (D[i, j] + D[j, k]) - D[i, k]; the lexicographically
# first triple attaining the minimum is reported.


@njit
def _triangle_nb(D, start, stop):
    n = D.shape[0]
    best = np.inf
    bi = bj = bk = -1
    for i in range(start, stop):
        for j in range(n):
            dij = D[i, j]
            for k in range(n):
                s = (dij + D[j, k]) - D[i, k]
                if s < best:
                    best = s
                    bi = i
                    bj = j
                    bk = k
    return best, bi, bj, bk


def _triangle_np(D, start, stop):
    n = D.shape[0]
    best = np.inf
    witness = (-1, -1, -1)
    for i in range(start, stop):
        slack = (D[i][:, None] + D) - D[i][None, :]
        flat = int(np.argmin(slack))
        val = slack.flat[flat]
        if val < best:
            best = float(val)
            witness = (i, flat // n, flat % n)
    return best, witness[0], witness[1], witness[2]


# below this many objects the numpy scan beats numba's first-call dispatch cost
SMALL_SCAN = 32


def triangle_scan(D, start=0, stop=None, backend=None):
    """Return ``(min_slack, i, j, k)`` over all triples with ``start <= i < stop``."""
    D = np.ascontiguousarray(D, dtype=np.float64)
    if stop is None:
        stop = D.shape[0]
    if backend is None and D.shape[0] <= SMALL_SCAN:
        backend = "numpy"
    if _pick(backend) == "numba":
        best, i, j, k = _triangle_nb(D, start, stop)
    else:
        best, i, j, k = _triangle_np(D, start, stop)
    return float(best), int(i), int(j), int(k)
