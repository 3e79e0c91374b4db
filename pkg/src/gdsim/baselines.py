"""Comparison similarity measures for categorical rows and numeric vectors.

Categorical measures follow the usual per-attribute conventions (Boriah,
Chandola and Kumar's survey of categorical similarity). For attribute ``k``
with ``n_k`` categories, value counts ``f`` and ``N`` rows,
``p(v) = f(v)/N`` and ``p2(v) = f(v)(f(v)-1) / (N(N-1))``:

========  ======================  ==========================================
measure   match                   mismatch
========  ======================  ==========================================
overlap   1                       0
eskin     1                       n_k^2 / (n_k^2 + 2)
iof       1                       1 / (1 + ln f(x) * ln f(y))
of        1                       1 / (1 + ln(N/f(x)) * ln(N/f(y)))
lin       2 ln p(x)               2 ln(p(x) + p(y))
goodall3  1 - p2(x)               0
goodall4  p2(x)                   0
========  ======================  ==========================================

Per-attribute scores are averaged, except for Lin, whose sum is divided by
``sum_k (ln p(x_k) + ln p(y_k))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

CATEGORICAL = ("overlap", "eskin", "iof", "of", "lin", "goodall3", "goodall4")
VECTOR = ("inner", "euclidean", "manhattan", "cosine")
ALIASES = {"l2": "euclidean", "l1": "manhattan", "g3": "goodall3", "g4": "goodall4"}


@dataclass(frozen=True)
class MeasureInfo:
    name: str
    family: str
    higher_is_similar: bool
    summary: str


MEASURES = {
    "overlap": MeasureInfo("overlap", "categorical", True, "fraction of matching attributes"),
    "eskin": MeasureInfo("eskin", "categorical", True, "mismatch n_k^2/(n_k^2+2)"),
    "iof": MeasureInfo("iof", "categorical", True, "inverse occurrence frequency"),
    "of": MeasureInfo("of", "categorical", True, "occurrence frequency"),
    "lin": MeasureInfo("lin", "categorical", True, "information-theoretic (Lin)"),
    "goodall3": MeasureInfo("goodall3", "categorical", True, "match 1 - p2(x)"),
    "goodall4": MeasureInfo("goodall4", "categorical", True, "match p2(x)"),
    "inner": MeasureInfo("inner", "vector", True, "inner product"),
    "euclidean": MeasureInfo("euclidean", "vector", False, "l2 distance"),
    "manhattan": MeasureInfo("manhattan", "vector", False, "l1 distance"),
    "cosine": MeasureInfo("cosine", "vector", True, "cosine of the angle"),
}


def canonical(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in MEASURES:
        raise KeyError(f"unknown measure {name!r}")
    return key


@dataclass(frozen=True, eq=False)
class FrequencyStats:
    """Category counts of every categorical attribute.

    ``codes[r, k]`` indexes ``categories[k]``; ``counts[k][c]`` is the number
    of rows holding category ``c`` of attribute ``k``.
    """

    attributes: tuple
    categories: tuple
    counts: tuple
    codes: np.ndarray
    N: int

    @property
    def n_categories(self):
        return [len(c) for c in self.categories]

    def probabilities(self, k):
        return self.counts[k] / self.N

    def encode_row(self, values):
        if len(values) != len(self.attributes):
            raise DataError(f"row has {len(values)} attributes, expected {len(self.attributes)}")
        out = np.empty(len(values), dtype=np.int64)
        for k, v in enumerate(values):
            cats = self.categories[k]
            try:
                out[k] = cats.index(v)
            except ValueError:
                raise DataError(f"attribute {self.attributes[k]!r}: unknown category {v!r}") from None
        return out


def compute_stats(dataset) -> FrequencyStats:
    """Counts over the categorical columns of a LabeledDataset."""
    names = dataset.columns_of_kind("categorical")
    if not names:
        raise DataError("dataset has no categorical columns")
    cats, counts, codes = [], [], []
    for name in names:
        col = dataset.column(name)
        values, inverse, cnt = np.unique(np.asarray(col, dtype=object).astype(str),
                                         return_inverse=True, return_counts=True)
        cats.append(list(values))
        counts.append(cnt.astype(np.float64))
        codes.append(inverse.astype(np.int64))
    return FrequencyStats(tuple(names), tuple(cats), tuple(counts),
                          np.column_stack(codes), dataset.n)


def attribute_table(measure: str, stats: FrequencyStats, k: int) -> np.ndarray:
    """``(n_k, n_k)`` per-attribute score for every pair of categories."""
    f = stats.counts[k]
    N = stats.N
    nk = f.size
    eye = np.eye(nk, dtype=bool)
    if measure == "overlap":
        return eye.astype(np.float64)
    if measure == "eskin":
        return np.where(eye, 1.0, nk * nk / (nk * nk + 2.0))
    if measure == "iof":
        lf = np.log(f)
        return np.where(eye, 1.0, 1.0 / (1.0 + np.outer(lf, lf)))
    if measure == "of":
        lf = np.log(N / f)
        return np.where(eye, 1.0, 1.0 / (1.0 + np.outer(lf, lf)))
    if measure == "lin":
        p = f / N
        return np.where(eye, 2.0 * np.log(p)[:, None], 2.0 * np.log(p[:, None] + p[None, :]))
    if measure in ("goodall3", "goodall4"):
        p2 = f * (f - 1.0) / (N * (N - 1.0))
        diag = 1.0 - p2 if measure == "goodall3" else p2
        return np.diag(diag)
    raise KeyError(f"not a categorical measure: {measure!r}")


class CategoricalScorer:
    """Scores of one categorical measure between any row and all rows."""

    def __init__(self, measure: str, stats: FrequencyStats):
        measure = canonical(measure)
        if MEASURES[measure].family != "categorical":
            raise KeyError(f"{measure!r} is not a categorical measure")
        self.measure = measure
        self.stats = stats
        self.tables = [attribute_table(measure, stats, k) for k in range(len(stats.attributes))]
        if measure == "lin":
            self.logp = [np.log(stats.probabilities(k)) for k in range(len(stats.attributes))]

    def _combine(self, total, denom_parts):
        d = len(self.tables)
        if self.measure != "lin":
            return total / d
        denom = denom_parts
        with np.errstate(invalid="ignore", divide="ignore"):
            out = total / denom
        # every attribute constant: the rows are identical
        return np.where(denom == 0.0, 1.0, out)

    def pair_codes(self, a, b) -> float:
        total = sum(t[a[k], b[k]] for k, t in enumerate(self.tables))
        denom = 0.0
        if self.measure == "lin":
            denom = sum(lp[a[k]] + lp[b[k]] for k, lp in enumerate(self.logp))
        return float(self._combine(np.float64(total), np.float64(denom)))

    def scores(self, i: int) -> np.ndarray:
        codes = self.stats.codes
        q = codes[i]
        total = np.zeros(codes.shape[0])
        denom = np.zeros(codes.shape[0])
        for k, t in enumerate(self.tables):
            total += t[q[k]][codes[:, k]]
            if self.measure == "lin":
                denom += self.logp[k][q[k]] + self.logp[k][codes[:, k]]
        return self._combine(total, denom)


def categorical_similarity(measure: str, x, y, stats: FrequencyStats) -> float:
    """Similarity of two rows given as category values (higher = closer)."""
    scorer = CategoricalScorer(measure, stats)
    return scorer.pair_codes(stats.encode_row(x), stats.encode_row(y))


def vector_similarity(measure: str, x, y) -> float:
    """Inner product / cosine (similarities) or Euclidean / Manhattan (distances).

    Cosine is 0 when either vector is zero.
    """
    measure = canonical(measure)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DataError(f"length mismatch: {x.shape} vs {y.shape}")
    if measure == "inner":
        return float(x @ y)
    if measure == "euclidean":
        return float(np.sqrt(np.sum((x - y) ** 2)))
    if measure == "manhattan":
        return float(np.sum(np.abs(x - y)))
    if measure == "cosine":
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        return 0.0 if nx == 0 or ny == 0 else float(x @ y / (nx * ny))
    raise KeyError(f"not a vector measure: {measure!r}")


class VectorScorer:
    """Vector measure between row ``i`` of a dense matrix and all rows."""

    def __init__(self, measure: str, X):
        measure = canonical(measure)
        if MEASURES[measure].family != "vector":
            raise KeyError(f"{measure!r} is not a vector measure")
        self.measure = measure
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.norms = np.linalg.norm(self.X, axis=1)

    def scores(self, i: int) -> np.ndarray:
        X, x = self.X, self.X[i]
        if self.measure == "inner":
            return X @ x
        if self.measure == "euclidean":
            return np.sqrt(np.sum((X - x) ** 2, axis=1))
        if self.measure == "manhattan":
            return np.sum(np.abs(X - x), axis=1)
        dots = X @ x
        denom = self.norms * self.norms[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            out = dots / denom
        return np.where(denom == 0, 0.0, out)
