"""Forward, reversed and normalized diffusion similarities of order ``k``.

The order-``k`` forward similarity ``g(i, j)`` is the probability that a walk
started at object ``i`` sits on object ``j`` after ``k`` object-feature-object
rounds, i.e. row ``i`` of ``S**k``. The reversed similarity is the transpose
(column ``i`` of ``S**k``) and the normalized similarity is the forward one
computed after rescaling each object's weights to sum to one.

Per-query functions alternate the two sparse maps on a dense state vector and
cost ``O(k * nnz(W))``; ``S`` itself is only formed by
:func:`similarity_matrix` for small ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graph import DiffusionOperator, FeatureMatrix, make_operator, row_normalize
from .parallel import pmap

KINDS = ("forward", "reversed", "normalized")
MATRIX_CAP = 20_000
DENSE_POWER_MAX_N = 512


@dataclass(frozen=True)
class Variant:
    kind: str = "forward"
    order: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"variant kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"diffusion order must be an integer >= 1, got {self.order!r}")

    def __str__(self):
        return f"{self.kind}:{self.order}"


@dataclass(frozen=True, eq=False)
class SimilarityVector:
    query: int
    scores: np.ndarray
    variant: Variant


def operator_for(w: FeatureMatrix, kind: str, storage="auto", backend=None) -> DiffusionOperator:
    """Operator to push for ``kind``; normalized variants use row-normalized weights."""
    if kind not in KINDS:
        raise ValueError(f"unknown variant kind {kind!r}")
    base = row_normalize(w) if kind == "normalized" else w
    return make_operator(base, storage=storage, backend=backend)


def _check_index(op, i):
    if not 0 <= i < op.n:
        raise IndexError(f"object index {i} out of range [0, {op.n})")


def _unit(n, i):
    x = np.zeros(n)
    x[i] = 1.0
    return x


def forward_row(op: DiffusionOperator, i: int, k: int) -> SimilarityVector:
    """``e_i^T S^k``: where a walk from ``i`` ends after ``k`` rounds."""
    variant = Variant("forward", k)
    _check_index(op, i)
    x = _unit(op.n, i)
    for _ in range(k):
        x = op.push(x)
    return SimilarityVector(i, x, variant)


def reversed_row(op: DiffusionOperator, i: int, k: int) -> SimilarityVector:
    """Column ``i`` of ``S^k``: ``r(i, j) = g(j, i)``."""
    variant = Variant("reversed", k)
    _check_index(op, i)
    v = _unit(op.n, i)
    for _ in range(k):
        v = op.pull(v)
    return SimilarityVector(i, v, variant)


def normalized_row(w: FeatureMatrix, i: int, k: int, op: DiffusionOperator | None = None):
    """Forward row on row-normalized weights; pass ``op`` to reuse an operator
    already built by ``operator_for(w, "normalized")``."""
    if op is None:
        op = operator_for(w, "normalized")
    row = forward_row(op, i, k)
    return SimilarityVector(i, row.scores, Variant("normalized", k))


def similarity_row(op: DiffusionOperator, variant: Variant, i: int) -> np.ndarray:
    """Scores of ``variant`` for query ``i``; ``op`` must come from
    :func:`operator_for` with the same kind."""
    if variant.kind == "reversed":
        return reversed_row(op, i, variant.order).scores
    return forward_row(op, i, variant.order).scores


def rows_all_orders(op: DiffusionOperator, kind: str, i: int, k_max: int) -> np.ndarray:
    """``(k_max, n)`` array whose row ``k-1`` is the order-``k`` similarity of ``i``."""
    _check_index(op, i)
    out = np.empty((k_max, op.n))
    x = _unit(op.n, i)
    step = op.pull if kind == "reversed" else op.push
    for k in range(k_max):
        x = step(x)
        out[k] = x
    return out


def similarity_matrix(w: FeatureMatrix, variant: Variant, *, cap=MATRIX_CAP,
                      storage="auto", threads=None) -> np.ndarray:
    """All pairwise similarities, ``out[i, j] = sim(i, j)``.

    Uses dense matrix powers for ``n <= 512`` and independent row pushes
    otherwise. Raises :class:`DataError` above ``cap`` objects.
    """
    if w.n > cap:
        raise DataError(f"n={w.n} exceeds the similarity-matrix cap of {cap}")
    op = operator_for(w, variant.kind, storage=storage)
    if w.n <= DENSE_POWER_MAX_N:
        G = np.linalg.matrix_power(op.matrix(), variant.order)
    else:
        rows = pmap(lambda i: forward_row(op, i, variant.order).scores, range(w.n), threads)
        G = np.vstack(rows)
    return G.T.copy() if variant.kind == "reversed" else G


def to_distance(s):
    """``1 - s``, elementwise; accepts a SimilarityVector, array or scalar."""
    if isinstance(s, SimilarityVector):
        return SimilarityVector(s.query, 1.0 - s.scores, s.variant)
    if np.isscalar(s):
        return 1.0 - s
    return 1.0 - np.asarray(s, dtype=np.float64)


def _explicit_first_order(w: FeatureMatrix, i: int, j: int) -> float:
    si, wi = w.row(i)
    sj, wj = w.row(j)
    common, ai, aj = np.intersect1d(si, sj, assume_unique=True, return_indices=True)
    return float(np.sum(wi[ai] * wj[aj] / w.q[common]) / w.p[i])


def pair(w: FeatureMatrix, variant: Variant, i: int, j: int) -> float:
    """Similarity of a single pair.

    Forward order 1 uses ``(1/p_i) * sum_s w_is * w_js / q_s`` directly; every
    other case extracts the entry from a row computation.
    """
    for idx in (i, j):
        if not 0 <= idx < w.n:
            raise IndexError(f"object index {idx} out of range [0, {w.n})")
    if variant.order == 1 and variant.kind != "reversed":
        base = row_normalize(w) if variant.kind == "normalized" else w
        return _explicit_first_order(base, i, j)
    if variant.order == 1:
        return _explicit_first_order(w, j, i)
    op = operator_for(w, variant.kind)
    return float(similarity_row(op, variant, i)[j])
