import json

import numpy as np
import pytest

from gdsim.errors import DataError
from gdsim.ingest import (ColumnSchema, LabeledDataset, build_dictionary, dump_schema, encode,
                          feature_names, infer_schema, load_schema, load_table, load_vectors)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


SCHEMA = {"color": "categorical", "size": "categorical", "weight": "continuous", "class": "label"}


def test_load_and_encode_categorical_table(tmp_path):
    f = write(tmp_path, "t.csv", "color,size,weight,class\nred,S,1.5,A\nblue,S,0,B\nred,L,2,A\n")
    ds = load_table(f, SCHEMA)
    assert ds.n == 3 and ds.labels == ("A", "B", "A")
    assert ds.label_name == "class"
    w = encode(ds)
    # lexicographic category order: blue, red | L, S | weight
    assert feature_names(ds) == ["color=blue", "color=red", "size=L", "size=S", "weight"]
    np.testing.assert_array_equal(w.toarray(), [[0, 1, 0, 1, 1.5], [1, 0, 0, 1, 0], [0, 1, 1, 0, 2]])
    np.testing.assert_array_equal(w.p, [3.5, 2, 4])


def test_one_hot_rows_sum_to_attribute_count(tmp_path):
    f = write(tmp_path, "t.csv", "a,b,y\nx,1,0\ny,2,1\nx,3,1\n")
    w = encode(load_table(f, {"a": "categorical", "b": "categorical", "y": "label"}))
    np.testing.assert_array_equal(w.p, [2, 2, 2])
    assert w.m == 5


def test_identifier_columns_are_ignored(tmp_path):
    f = write(tmp_path, "t.csv", "name,a,y\nann,x,0\nbob,y,1\n")
    ds = load_table(f, {"name": "identifier", "a": "categorical", "y": "label"})
    assert encode(ds).m == 2


@pytest.mark.parametrize("text, msg", [
    ("a,y\nx,0\n?,1\n", "missing value at row 2"),
    ("a,y\nx,0\n,1\n", "missing value"),
    ("a,y\nx,0\ny\n", "ragged"),
    ("a,y\n", "no data rows"),
    ("", "empty"),
])
def test_table_errors(tmp_path, text, msg):
    f = write(tmp_path, "t.csv", text)
    with pytest.raises(DataError, match=msg):
        load_table(f, {"a": "categorical", "y": "label"})


def test_missing_label_column(tmp_path):
    f = write(tmp_path, "t.csv", "a,b\nx,0\ny,1\n")
    with pytest.raises(DataError, match="label column"):
        load_table(f, {"a": "categorical", "b": "categorical", "y": "label"})


def test_non_numeric_continuous(tmp_path):
    f = write(tmp_path, "t.csv", "v,y\n1,0\nabc,1\n")
    with pytest.raises(DataError, match="non-numeric"):
        load_table(f, {"v": "continuous", "y": "label"})


def test_negative_continuous_needs_rescale(tmp_path):
    f = write(tmp_path, "t.csv", "v,a,y\n-1,p,0\n3,q,1\n")
    ds = load_table(f, {"v": "continuous", "a": "categorical", "y": "label"})
    with pytest.raises(DataError, match="negative"):
        encode(ds)
    w = encode(ds, rescale=True)
    np.testing.assert_array_equal(w.toarray()[:, 0], [0, 4])


def test_schema_round_trip_and_inference(tmp_path):
    schema = [ColumnSchema("a", "categorical"), ColumnSchema("v", "continuous"),
              ColumnSchema("y", "label")]
    dump_schema(schema, tmp_path / "s.json")
    assert load_schema(tmp_path / "s.json") == schema
    assert json.loads((tmp_path / "s.json").read_text())
    inferred = infer_schema(["a", "v", "class"], [["x", "1.5", "p"], ["y", "2", "q"]])
    assert [c.kind for c in inferred] == ["categorical", "continuous", "label"]
    f = write(tmp_path, "t.csv", "a,v,class\nx,1,p\ny,2,q\n")
    assert load_table(f, infer=True).labels == ("p", "q")
    with pytest.raises(DataError):
        load_table(f)


def test_schema_validation():
    with pytest.raises(ValueError):
        ColumnSchema("a", "ordinal")
    with pytest.raises((ValueError, DataError)):
        LabeledDataset((ColumnSchema("a", "categorical"),), (("x",), ("y",)), ("p", "q"))


def test_dictionary_is_lexicographic(tmp_path):
    f = write(tmp_path, "t.csv", "a,y\nz,0\nb,1\nm,0\n")
    d = build_dictionary(load_table(f, {"a": "categorical", "y": "label"}))
    assert d.categories["a"] == ["b", "m", "z"]
    assert d.index("a", "m") == 1


def test_load_vectors(tmp_path):
    f = write(tmp_path, "v.csv", "x1,x2,lab\n1,0,a\n0.5,2,b\n")
    w, labels = load_vectors(f, label_col="lab")
    assert labels == ["a", "b"]
    np.testing.assert_array_equal(w.toarray(), [[1, 0], [0.5, 2]])
    g = write(tmp_path, "v2.csv", "1,2\n3,4\n")
    lf = write(tmp_path, "labels.txt", "p\nq\n")
    w, labels = load_vectors(g, label_file=lf)
    assert w.n == 2 and labels == ["p", "q"]


@pytest.mark.parametrize("text, msg", [
    ("1,-2\n3,4\n", "negative"),
    ("1,2\n3\n", "inconsistent"),
    ("1,2\n0,0\n", "null object"),
])
def test_load_vectors_errors(tmp_path, text, msg):
    with pytest.raises(DataError, match=msg):
        load_vectors(write(tmp_path, "v.csv", text))
