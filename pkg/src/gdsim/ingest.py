"""Labeled tables and embedding files -> FeatureMatrix.

Categorical columns are one-hot encoded (categories in lexicographic order),
continuous columns pass through as raw non-negative weights, identifier
columns are ignored and exactly one label column carries the class.
"""

from __future__ import annotations

import bisect
import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import FeatureMatrix, build

KINDS = ("categorical", "continuous", "identifier", "label")
MISSING = {"", "?"}
_DEFAULT_LABEL_NAMES = ("label", "class")


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"column {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")


def _check_schema(schema):
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        dupes = sorted({x for x in names if names.count(x) > 1})
        raise DataError(f"duplicate column names in schema: {dupes}")
    labels = [c.name for c in schema if c.kind == "label"]
    if len(labels) != 1:
        raise DataError(f"schema needs exactly one label column, found {len(labels)}")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Rows of typed cells (label column excluded) plus one label per row.

    ``rows[r]`` follows the order of ``feature_schema``; categorical cells are
    strings, continuous cells floats, identifier cells strings.
    """

    schema: tuple
    rows: tuple
    labels: tuple

    def __post_init__(self):
        _check_schema(self.schema)
        if len(self.rows) < 2:
            raise DataError(f"need at least 2 rows, got {len(self.rows)}")
        if len(self.rows) != len(self.labels):
            raise DataError("rows and labels differ in length")
        width = len(self.feature_schema)
        for r, row in enumerate(self.rows):
            if len(row) != width:
                raise DataError(f"row {r} has {len(row)} values, expected {width}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def feature_schema(self):
        return tuple(c for c in self.schema if c.kind != "label")

    @property
    def label_name(self) -> str:
        return next(c.name for c in self.schema if c.kind == "label")

    def column(self, name):
        for pos, c in enumerate(self.feature_schema):
            if c.name == name:
                return [row[pos] for row in self.rows]
        raise KeyError(name)

    def columns_of_kind(self, kind):
        return [c.name for c in self.feature_schema if c.kind == kind]


@dataclass(frozen=True)
class CategoryDictionary:
    """Per categorical column: sorted distinct values and their counts."""

    categories: dict
    counts: dict

    def index(self, column, value):
        cats = self.categories[column]
        pos = _bisect(cats, value)
        if pos is None:
            raise DataError(f"column {column!r}: unseen category {value!r}")
        return pos


def _bisect(sorted_values, value):
    pos = bisect.bisect_left(sorted_values, value)
    if pos < len(sorted_values) and sorted_values[pos] == value:
        return pos
    return None


def build_dictionary(dataset: LabeledDataset) -> CategoryDictionary:
    categories, counts = {}, {}
    for name in dataset.columns_of_kind("categorical"):
        tally = Counter(dataset.column(name))
        cats = sorted(tally)
        categories[name] = cats
        counts[name] = [tally[c] for c in cats]
    return CategoryDictionary(categories, counts)


# --------------------------------------------------------------------------
# schema handling


def load_schema(path) -> list:
    """Read a JSON object mapping column name -> kind (order is kept)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON schema ({exc})") from None
    if not isinstance(raw, dict):
        raise DataError(f"{path}: schema must be a JSON object of name -> kind")
    return [ColumnSchema(str(k), str(v)) for k, v in raw.items()]


def dump_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({c.name: c.kind for c in schema}, fh, indent=2)
        fh.write("\n")


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def infer_schema(header, body, label=None):
    """Label column by name (default ``label``/``class``); every other column is
    categorical iff any of its cells fails numeric parsing."""
    if label is None:
        lowered = {h.lower(): h for h in header}
        label = next((lowered[x] for x in _DEFAULT_LABEL_NAMES if x in lowered), None)
        if label is None:
            raise DataError("missing label column: none named 'label' or 'class'; pass label=")
    if label not in header:
        raise DataError(f"missing label column {label!r}")
    schema = []
    for pos, name in enumerate(header):
        if name == label:
            schema.append(ColumnSchema(name, "label"))
            continue
        cells = [row[pos].strip() for row in body]
        numeric = all(_is_number(c) for c in cells if c not in MISSING)
        schema.append(ColumnSchema(name, "continuous" if numeric else "categorical"))
    return schema


# --------------------------------------------------------------------------
# loaders


def _read_delimited(path, delimiter):
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for r, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}: ragged row {r + 1} (line {r + 2}) has {len(row)} cells, "
                            f"header has {len(header)}")
    return header, body


def load_table(path, schema=None, *, infer=False, label=None, delimiter=",") -> LabeledDataset:
    """Parse a delimiter-separated file with a header row.

    ``schema`` is a list of :class:`ColumnSchema`, a ``{name: kind}`` dict or
    a path to a JSON schema file. Without a schema, ``infer=True`` is
    required.
    """
    header, body = _read_delimited(path, delimiter)
    if not body:
        raise DataError(f"{path}: header but no data rows")
    if schema is None:
        if not infer:
            raise DataError("no schema given; pass a schema or infer=True")
        schema = infer_schema(header, body, label)
    elif isinstance(schema, (str, Path)):
        schema = load_schema(schema)
    elif isinstance(schema, dict):
        schema = [ColumnSchema(k, v) for k, v in schema.items()]
    _check_schema(schema)

    by_name = {c.name: c for c in schema}
    missing = [c.name for c in schema if c.name not in header]
    if missing:
        kind = by_name[missing[0]].kind
        what = "label column" if kind == "label" else "column"
        raise DataError(f"{path}: missing {what} {missing[0]!r}")
    extra = [h for h in header if h not in by_name]
    if extra:
        raise DataError(f"{path}: column(s) not described by schema: {extra}")
    ordered = [by_name[h] for h in header]

    label_pos = next(p for p, c in enumerate(ordered) if c.kind == "label")
    feat = [(p, c) for p, c in enumerate(ordered) if c.kind != "label"]
    rows, labels = [], []
    for r, raw in enumerate(body):
        cells = [c.strip() for c in raw]
        for p, c in enumerate(ordered):
            if cells[p] in MISSING:
                raise DataError(f"{path}: missing value at row {r + 1} (line {r + 2}), "
                                f"column {c.name!r}")
        out = []
        for p, c in feat:
            if c.kind == "continuous":
                try:
                    v = float(cells[p])
                except ValueError:
                    raise DataError(f"{path}: non-numeric value {cells[p]!r} at row {r + 1}, "
                                    f"column {c.name!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite value at row {r + 1}, column {c.name!r}")
                out.append(v)
            else:
                out.append(cells[p])
        rows.append(tuple(out))
        labels.append(cells[label_pos])
    return LabeledDataset(tuple(ordered), tuple(rows), tuple(labels))


def feature_names(dataset: LabeledDataset, dictionary: CategoryDictionary | None = None):
    dictionary = dictionary or build_dictionary(dataset)
    names = []
    for c in dataset.feature_schema:
        if c.kind == "categorical":
            names.extend(f"{c.name}={v}" for v in dictionary.categories[c.name])
        elif c.kind == "continuous":
            names.append(c.name)
    return names


def encode(dataset: LabeledDataset, dictionary: CategoryDictionary | None = None,
           *, rescale=False) -> FeatureMatrix:
    """One-hot categorical columns, pass continuous columns through.

    ``rescale`` enables the ``x - min`` shift for continuous columns with
    negative values: ``True`` for all of them or a collection of names.
    Negative values in any other column raise :class:`DataError`.
    """
    dictionary = dictionary or build_dictionary(dataset)
    n = dataset.n
    rows_out, cols_out, vals_out = [], [], []
    offset = 0
    for pos, c in enumerate(dataset.feature_schema):
        values = [row[pos] for row in dataset.rows]
        if c.kind == "categorical":
            cats = dictionary.categories[c.name]
            codes = np.array([dictionary.index(c.name, v) for v in values], dtype=np.int64)
            rows_out.append(np.arange(n))
            cols_out.append(offset + codes)
            vals_out.append(np.ones(n))
            offset += len(cats)
        elif c.kind == "continuous":
            x = np.asarray(values, dtype=np.float64)
            if x.min() < 0:
                if rescale is True or (rescale and c.name in rescale):
                    x = x - x.min()
                else:
                    r = int(np.argmin(x))
                    raise DataError(f"negative value {x[r]} in continuous column {c.name!r} "
                                    f"(row {r + 1}); enable rescale to shift by the minimum")
            rows_out.append(np.arange(n))
            cols_out.append(np.full(n, offset))
            vals_out.append(x)
            offset += 1
    if offset == 0:
        raise DataError("dataset has no categorical or continuous columns to encode")
    return build((np.concatenate(rows_out), np.concatenate(cols_out), np.concatenate(vals_out)),
                 n, offset)


def load_labels(path):
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def load_vectors(path, *, delimiter=",", label_col=None, label_file=None):
    """Read dense non-negative vectors, one object per row.

    A header row is detected when any cell of the first row is non-numeric;
    ``label_col`` names a column of that header holding the labels, and
    ``label_file`` gives one label per line instead. Returns
    ``(FeatureMatrix, labels or None)``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: inconsistent row length at row {r + 1} "
                            f"({len(row)} vs {width})")
    labels = None
    if label_col is not None:
        if header is None or label_col not in header:
            raise DataError(f"{path}: label column {label_col!r} not found in header")
        lp = header.index(label_col)
        labels = [row[lp].strip() for row in rows]
        rows = [row[:lp] + row[lp + 1:] for row in rows]
    try:
        X = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if label_file is not None:
        labels = load_labels(label_file)
        if len(labels) != X.shape[0]:
            raise DataError(f"{label_file}: {len(labels)} labels for {X.shape[0]} rows")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path}: non-finite entry")
    if np.any(X < 0):
        r, s = np.argwhere(X < 0)[0]
        raise DataError(f"{path}: negative entry {X[r, s]} at row {r + 1}, column {s + 1}")
    zero = np.flatnonzero(X.sum(axis=1) == 0)
    if zero.size:
        raise DataError(f"{path}: null object (all-zero row) at row {zero[0] + 1}")
    rr, cc = np.nonzero(X)
    return build((rr, cc, X[rr, cc]), X.shape[0], X.shape[1]), labels
