"""Object-feature weight matrices and the two stochastic maps built from them.

A :class:`FeatureMatrix` stores the non-negative ``n x m`` weights ``W`` in CSR
form together with the row sums ``p`` and column sums ``q``. The
:class:`DiffusionOperator` holds the row-stochastic maps ``P^-1 W``
(object -> feature) and ``Q^-1 W^T`` (feature -> object); their product is the
one-round transition matrix ``S`` between objects, which is never formed on
the per-query path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import DataError

STOCHASTIC_TOL = 1e-9
DENSE_THRESHOLD = 0.5


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _transpose_csr(indptr, indices, data, ncols):
    """CSR arrays of the transpose; rows of the result keep ascending order."""
    nrows = len(indptr) - 1
    rows = np.repeat(np.arange(nrows, dtype=np.int64), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    t_indptr = np.zeros(ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(indices, minlength=ncols), out=t_indptr[1:])
    return t_indptr, rows[order], data[order]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Validated sparse non-negative weights with cached row/column sums.

    Use :func:`build` or :func:`from_dense` rather than the constructor.
    ``feature_ids`` maps each kept column back to the caller's column index
    (columns with zero weight are dropped at build time).
    """

    n: int
    m: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    p: np.ndarray
    q: np.ndarray
    feature_ids: np.ndarray = field(repr=False)

    @property
    def nnz(self) -> int:
        return int(self.data.shape[0])

    @property
    def density(self) -> float:
        return self.nnz / float(self.n * self.m)

    @cached_property
    def row_ids(self) -> np.ndarray:
        return _frozen(np.repeat(np.arange(self.n), np.diff(self.indptr)), np.int64)

    @cached_property
    def _csc(self):
        return tuple(_frozen(a, a.dtype) for a in
                     _transpose_csr(self.indptr, self.indices, self.data, self.m))

    def csc(self):
        """``(indptr, row_indices, data)`` of ``W`` stored column by column."""
        return self._csc

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.n, self.m))
        out[self.row_ids, self.indices] = self.data
        return out

    def entries(self):
        """Iterate ``(object, feature, weight)`` triplets in row-major order."""
        for i, s, w in zip(self.row_ids.tolist(), self.indices.tolist(), self.data.tolist()):
            yield i, s, w

    def row(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def sums_consistent(self, rtol=1e-12) -> bool:
        p = np.bincount(self.row_ids, weights=self.data, minlength=self.n)
        q = np.bincount(self.indices, weights=self.data, minlength=self.m)
        return bool(np.allclose(p, self.p, rtol=rtol, atol=0)
                    and np.allclose(q, self.q, rtol=rtol, atol=0))


def build(entries, n, m, *, drop_zero_columns=True) -> FeatureMatrix:
    """Validate ``(object, feature, weight)`` triplets and build a FeatureMatrix.

    ``entries`` is an iterable of triplets or a ``(rows, cols, weights)`` tuple
    of arrays. Explicit zero weights are discarded. Raises :class:`DataError`
    on out-of-range indices, negative or non-finite weights, duplicate
    coordinates and objects without any positive weight. Features without
    weight are removed with a warning.
    """
    if isinstance(entries, tuple) and len(entries) == 3 and not np.isscalar(entries[0]):
        rows, cols, vals = (np.asarray(a) for a in entries)
    else:
        arr = list(entries)
        if arr:
            rows, cols, vals = (np.asarray(c) for c in zip(*arr))
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
    rows = rows.astype(np.int64, copy=False)
    cols = cols.astype(np.int64, copy=False)
    vals = vals.astype(np.float64, copy=False)
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise DataError(f"matrix must have n >= 1 and m >= 1, got n={n}, m={m}")
    if rows.size:
        if rows.min() < 0 or rows.max() >= n:
            raise DataError(f"object index out of range [0, {n})")
        if cols.min() < 0 or cols.max() >= m:
            raise DataError(f"feature index out of range [0, {m})")
    if not np.all(np.isfinite(vals)):
        raise DataError("weights must be finite")
    if np.any(vals < 0):
        bad = int(np.flatnonzero(vals < 0)[0])
        raise DataError(f"negative weight {vals[bad]} at ({rows[bad]}, {cols[bad]})")

    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
    if np.any(dup):
        k = int(np.flatnonzero(dup)[0])
        raise DataError(f"duplicate coordinate ({rows[k]}, {cols[k]})")

    keep = vals > 0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]

    p = np.bincount(rows, weights=vals, minlength=n)
    if np.any(p <= 0):
        bad = np.flatnonzero(p <= 0)
        raise DataError(f"null object(s) with no positive weight: {bad[:10].tolist()}")

    q_full = np.bincount(cols, weights=vals, minlength=m)
    feature_ids = np.arange(m)
    if np.any(q_full <= 0):
        if not drop_zero_columns:
            raise DataError("feature(s) with no positive weight")
        feature_ids = np.flatnonzero(q_full > 0)
        warnings.warn(f"dropping {m - feature_ids.size} all-zero feature column(s)",
                      RuntimeWarning, stacklevel=2)
        remap = np.full(m, -1, dtype=np.int64)
        remap[feature_ids] = np.arange(feature_ids.size)
        cols = remap[cols]
        m = int(feature_ids.size)
        q_full = q_full[feature_ids]

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return FeatureMatrix(
        n=n, m=m,
        indptr=_frozen(indptr, np.int64),
        indices=_frozen(cols, np.int64),
        data=_frozen(vals, np.float64),
        p=_frozen(p, np.float64),
        q=_frozen(q_full, np.float64),
        feature_ids=_frozen(feature_ids, np.int64),
    )


def from_dense(array, **kwargs) -> FeatureMatrix:
    a = np.asarray(array, dtype=np.float64)
    if a.ndim != 2:
        raise DataError(f"expected a 2-D array, got shape {a.shape}")
    if np.any(a < 0):
        i, s = np.argwhere(a < 0)[0]
        raise DataError(f"negative weight {a[i, s]} at ({i}, {s})")
    rows, cols = np.nonzero(a)
    return build((rows, cols, a[rows, cols]), a.shape[0], a.shape[1], **kwargs)


def row_normalize(w: FeatureMatrix) -> FeatureMatrix:
    """Rescale every object's weights to sum to one (same sparsity pattern)."""
    data = w.data / w.p[w.row_ids]
    p = np.bincount(w.row_ids, weights=data, minlength=w.n)
    q = np.bincount(w.indices, weights=data, minlength=w.m)
    return FeatureMatrix(n=w.n, m=w.m, indptr=w.indptr, indices=w.indices,
                         data=_frozen(data, np.float64), p=_frozen(p, np.float64),
                         q=_frozen(q, np.float64), feature_ids=w.feature_ids)


def row_sum_ratio(w: FeatureMatrix) -> float:
    """``min p / max p`` over object row sums.

    Above 2/3 the one-round forward and reversed distances satisfy the
    triangle inequality.
    """
    return float(w.p.min() / w.p.max())


@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    """The pair of row-stochastic maps whose composition is ``S``.

    ``forward`` is ``P^-1 W`` (n x m) and ``backward`` is ``Q^-1 W^T`` (m x n),
    each stored as CSR ``(indptr, indices, data)``. When ``dense`` is set the
    same maps are also kept as dense arrays and applied with BLAS.
    """

    n: int
    m: int
    forward: tuple
    backward: tuple
    dense: bool = False
    forward_dense: np.ndarray | None = field(default=None, repr=False)
    backward_dense: np.ndarray | None = field(default=None, repr=False)
    backend: str | None = None

    def push(self, x: np.ndarray) -> np.ndarray:
        """Row vector times ``S``: one forward round of walk mass."""
        if self.dense:
            return (x @ self.forward_dense) @ self.backward_dense
        y = _kernels.scatter(*self.forward, x, self.m, backend=self.backend)
        return _kernels.scatter(*self.backward, y, self.n, backend=self.backend)

    def pull(self, v: np.ndarray) -> np.ndarray:
        """``S`` times a column vector (the transposed walk)."""
        if self.dense:
            return self.forward_dense @ (self.backward_dense @ v)
        u = _kernels.gather(*self.backward, v, backend=self.backend)
        return _kernels.gather(*self.forward, u, backend=self.backend)

    def to_feature(self, x: np.ndarray) -> np.ndarray:
        """Half round: object distribution to feature distribution."""
        if self.dense:
            return x @ self.forward_dense
        return _kernels.scatter(*self.forward, x, self.m, backend=self.backend)

    def matrix(self) -> np.ndarray:
        """Dense ``S``; only for small instances."""
        A = _csr_to_dense(*self.forward, self.n, self.m)
        B = _csr_to_dense(*self.backward, self.m, self.n)
        return A @ B


def _csr_to_dense(indptr, indices, data, nrows, ncols):
    out = np.zeros((nrows, ncols))
    out[np.repeat(np.arange(nrows), np.diff(indptr)), indices] = data
    return out


def make_operator(w: FeatureMatrix, storage="auto", backend=None) -> DiffusionOperator:
    """Build the two stochastic maps of ``w``.

    ``storage`` is ``"sparse"``, ``"dense"`` or ``"auto"`` (dense once more
    than half the entries are non-zero).
    """
    if storage not in ("auto", "sparse", "dense"):
        raise ValueError(f"unknown storage {storage!r}")
    fwd_data = w.data / w.p[w.row_ids]
    c_indptr, c_rows, c_data = w.csc()
    col_ids = np.repeat(np.arange(w.m), np.diff(c_indptr))
    bwd_data = c_data / w.q[col_ids]

    for name, data, ids, size in (("object->feature", fwd_data, w.row_ids, w.n),
                                  ("feature->object", bwd_data, col_ids, w.m)):
        sums = np.bincount(ids, weights=data, minlength=size)
        defect = np.max(np.abs(sums - 1.0))
        if defect > STOCHASTIC_TOL:
            raise DataError(f"{name} map not stochastic (defect {defect:.3g})")

    forward = (w.indptr, w.indices, _frozen(fwd_data, np.float64))
    backward = (c_indptr, c_rows, _frozen(bwd_data, np.float64))
    dense = storage == "dense" or (storage == "auto" and w.density > DENSE_THRESHOLD)
    fd = bd = None
    if dense:
        fd = _csr_to_dense(*forward, w.n, w.m)
        bd = _csr_to_dense(*backward, w.m, w.n)
    return DiffusionOperator(n=w.n, m=w.m, forward=forward, backward=backward,
                             dense=dense, forward_dense=fd, backward_dense=bd,
                             backend=backend)


# --------------------------------------------------------------------------
# text formats


def write_triplets(path, w: FeatureMatrix, header=()):
    """Write ``i s w`` lines (0-based) after ``#`` header lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# shape {w.n} {w.m}\n")
        for i, s, v in w.entries():
            fh.write(f"{i} {s} {v!r}\n")


def read_triplets(path, **kwargs) -> FeatureMatrix:
    """Read an ``i s w`` triplet file. A ``# shape n m`` comment fixes the size."""
    rows, cols, vals = [], [], []
    shape = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 3 and parts[0] == "shape":
                    shape = int(parts[1]), int(parts[2])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 'i s w', got {line!r}")
            try:
                rows.append(int(parts[0]))
                cols.append(int(parts[1]))
                vals.append(float(parts[2]))
            except ValueError:
                raise DataError(f"{path}:{lineno}: cannot parse {line!r}") from None
    if not rows:
        raise DataError(f"{path}: no entries")
    if shape is None:
        shape = max(rows) + 1, max(cols) + 1
    return build((np.array(rows), np.array(cols), np.array(vals)), *shape, **kwargs)


def write_dense(path, w: FeatureMatrix, delimiter=","):
    np.savetxt(path, w.toarray(), delimiter=delimiter, fmt="%.17g")
