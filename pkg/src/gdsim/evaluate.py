"""Nearest-neighbour error curves.

For a query ``x`` with label ``y`` and a fraction ``0 < f <= 1`` the point
error is the share of objects labelled differently from ``y`` among the
``ceil(n f)`` objects ranked most similar to ``x`` (``x`` itself included;
scores equal up to rounding tie, and ties go to the lower object index).
The error curve ``E(f)`` averages the point error over all queries, with
``E(0) = 0``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .diffusion import Variant, operator_for, rows_all_orders, similarity_row
from .errors import DataError
from .graph import FeatureMatrix
from .ingest import LabeledDataset, encode
from .parallel import chunks, get_threads, pmap

SUMMARY_POINTS = (0.01, 0.02, 0.05)
DEFAULT_VARIANT_KIND = "reversed"
TIE_TOL = 1e-12


def default_grid(points=100) -> np.ndarray:
    """``f = 1/points, 2/points, ..., 1``."""
    return np.arange(1, points + 1) / float(points)


def neighbor_count(n: int, f: float) -> int:
    """``ceil(n f)``, robust to binary rounding of ``f`` (0.07 * 100 -> 7)."""
    if not 0 < f <= 1:
        raise ValueError(f"f must lie in (0, 1], got {f}")
    return min(n, max(1, math.ceil(round(n * f, 9))))


@dataclass(frozen=True, eq=False)
class ErrorCurve:
    measure: str
    grid: np.ndarray
    values: np.ndarray
    n: int
    class_counts: dict = field(default_factory=dict)

    def at(self, f: float) -> float:
        if f == 0:
            return 0.0
        hit = np.flatnonzero(np.isclose(self.grid, f, rtol=0, atol=1e-12))
        if hit.size == 0:
            raise KeyError(f"f={f} is not on the curve's grid")
        return float(self.values[hit[0]])

    def summary(self, points=SUMMARY_POINTS):
        return tuple(self.at(f) for f in points)


def class_mix(labels) -> float:
    """``sum_c (n_c/n)(1 - n_c/n)``: the value every curve takes at ``f = 1``."""
    counts = np.array(list(Counter(labels).values()), dtype=np.float64)
    share = counts / counts.sum()
    return float(np.sum(share * (1.0 - share)))


def rank_neighbors(scores, higher_is_similar=True, tie_tol=TIE_TOL) -> np.ndarray:
    """Object indices from most to least similar; ties by ascending index.

    Scores within ``tie_tol * max|score|`` of their sorted neighbour count as
    tied, so rounding noise between mathematically equal values (the same
    similarity reached by different summation orders) does not decide ranks.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if np.isnan(scores).any():
        raise DataError("NaN similarity score")
    key = -scores if higher_is_similar else scores
    order = np.argsort(key, kind="stable")
    if tie_tol <= 0 or scores.size < 2:
        return order
    tol = tie_tol * max(1.0, float(np.max(np.abs(scores))))
    ranked = key[order]
    group = np.concatenate(([0], np.cumsum(np.diff(ranked) > tol)))
    return order[np.lexsort((order, group))]


def point_error(rank, labels, x: int, f: float) -> float:
    """Share of the ``ceil(n f)`` nearest objects whose label differs from ``x``'s."""
    labels = np.asarray(labels)
    K = neighbor_count(len(labels), f)
    nearest = np.asarray(rank)[:K]
    return float(np.count_nonzero(labels[nearest] != labels[x]) / K)


def _label_codes(labels):
    _, codes = np.unique(np.asarray(labels, dtype=object).astype(str), return_inverse=True)
    return codes.astype(np.int64)


def _point_errors(order, codes, x, Ks):
    mism = np.cumsum(codes[order] != codes[x])
    return mism[Ks - 1] / Ks


def _curve(score_fn, higher, labels, grid, name, threads=None):
    codes = _label_codes(labels)
    n = codes.size
    grid = np.asarray(grid, dtype=np.float64)
    Ks = np.array([neighbor_count(n, f) for f in grid], dtype=np.int64)

    def block(bounds):
        lo, hi = bounds
        out = np.empty((hi - lo, Ks.size))
        for r, x in enumerate(range(lo, hi)):
            out[r] = _point_errors(rank_neighbors(score_fn(x), higher), codes, x, Ks)
        return out

    threads = get_threads() if threads is None else threads
    per_query = np.vstack(pmap(block, chunks(n, 4 * threads), threads))
    return ErrorCurve(name, grid, per_query.mean(axis=0), n, dict(Counter(labels)))


# --------------------------------------------------------------------------
# measure resolution


def parse_measure(name: str, variant: Variant | None = None):
    """Split a measure name into ``(baseline_name or None, Variant or None)``.

    ``gd`` selects the diffusion family (default kind reversed, order 1);
    ``gd3`` is shorthand for order 3.
    """
    key = name.strip().lower()
    if key.startswith("gd"):
        order = int(key[2:]) if key[2:] else None
        if variant is None:
            variant = Variant(DEFAULT_VARIANT_KIND, order or 1)
        elif order is not None and order != variant.order:
            raise ValueError(f"measure {name!r} conflicts with order {variant.order}")
        return None, variant
    return baselines.canonical(key), None


def measure_label(name: str, variant: Variant | None = None) -> str:
    base, v = parse_measure(name, variant)
    return base if v is None else f"gd-{v.kind}-{v.order}"


def _as_inputs(data, labels=None):
    """Return ``(dataset or None, FeatureMatrix, labels)``."""
    if isinstance(data, LabeledDataset):
        return data, encode(data), list(data.labels)
    if isinstance(data, tuple) and len(data) == 2:
        data, labels = data
    if isinstance(data, FeatureMatrix):
        if labels is None:
            raise DataError("labels are required for a bare FeatureMatrix")
        if len(labels) != data.n:
            raise DataError(f"{len(labels)} labels for {data.n} objects")
        return None, data, list(labels)
    raise TypeError(f"cannot evaluate on {type(data).__name__}")


def make_scorer(measure: str, data, variant: Variant | None = None, *, storage="auto"):
    """``(score_fn, higher_is_similar, label)`` for a measure on ``data``."""
    dataset, w, _ = _as_inputs(data)
    base, v = parse_measure(measure, variant)
    if v is not None:
        op = operator_for(w, v.kind, storage=storage)
        return (lambda i: similarity_row(op, v, i)), True, measure_label(measure, v)
    info = baselines.MEASURES[base]
    if info.family == "categorical":
        if dataset is None:
            raise DataError(f"measure {base!r} needs a categorical table, not vectors")
        scorer = baselines.CategoricalScorer(base, baselines.compute_stats(dataset))
    else:
        scorer = baselines.VectorScorer(base, w.toarray())
    return scorer.scores, info.higher_is_similar, base


def error_curve(data, measure: str, variant: Variant | None = None, grid=None, *,
                labels=None, threads=None, storage="auto") -> ErrorCurve:
    """Error curve of one measure.

    ``data`` is a :class:`LabeledDataset` (encoded as needed) or a
    ``(FeatureMatrix, labels)`` pair. ``measure`` is a baseline name or
    ``gd``/``gdK``; ``variant`` overrides the diffusion kind and order.
    """
    if grid is None:
        grid = default_grid()
    _, _, lab = _as_inputs(data, labels)
    score_fn, higher, name = make_scorer(measure, data if labels is None else (data, labels),
                                         variant, storage=storage)
    return _curve(score_fn, higher, lab, grid, name, threads)


def optimal_curve(labels, grid=None) -> ErrorCurve:
    """Curve of a measure that always ranks same-label objects first."""
    if grid is None:
        grid = default_grid()
    codes = _label_codes(labels)
    n = codes.size
    sizes = np.bincount(codes)[codes].astype(np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    values = np.empty(grid.size)
    for g, f in enumerate(grid):
        K = neighbor_count(n, f)
        values[g] = np.mean(np.maximum(0.0, (K - sizes) / K))
    return ErrorCurve("optimal", grid, values, n, dict(Counter(labels)))


def sweep_orders(data, kind: str = DEFAULT_VARIANT_KIND, k_max: int = 7, grid=None, *,
                 labels=None, threads=None, storage="auto"):
    """One curve per order ``1..k_max``; each query is pushed once for all orders."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if grid is None:
        grid = default_grid()
    _, w, lab = _as_inputs(data, labels)
    op = operator_for(w, kind, storage=storage)
    codes = _label_codes(lab)
    n = codes.size
    grid = np.asarray(grid, dtype=np.float64)
    Ks = np.array([neighbor_count(n, f) for f in grid], dtype=np.int64)

    def block(bounds):
        lo, hi = bounds
        out = np.empty((k_max, hi - lo, Ks.size))
        for r, x in enumerate(range(lo, hi)):
            rows = rows_all_orders(op, kind, x, k_max)
            for k in range(k_max):
                out[k, r] = _point_errors(rank_neighbors(rows[k]), codes, x, Ks)
        return out

    threads = get_threads() if threads is None else threads
    per_query = np.concatenate(pmap(block, chunks(n, 4 * threads), threads), axis=1)
    counts = dict(Counter(lab))
    return [ErrorCurve(f"gd-{kind}-{k + 1}", grid, per_query[k].mean(axis=0), n, counts)
            for k in range(k_max)]


def write_curve(path, curve: ErrorCurve, header=(), summary=None):
    """Two tab-separated columns ``f  E(f)`` after ``#`` header lines; an
    optional ``# summary`` line lists ``E`` at the requested points."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# measure={curve.measure} n={curve.n}\n")
        fh.write("f\tE\n")
        fh.write("0\t0\n")
        for f, e in zip(curve.grid, curve.values):
            fh.write(f"{f:.6g}\t{e:.12g}\n")
        if summary:
            fh.write("# summary " + " ".join(f"E({f:g})={curve.at(f):.4f}" for f in summary) + "\n")
