"""Regenerate the UCI Balance Scale table as a headed CSV.

The UCI file enumerates every (left-weight, left-distance, right-weight,
right-distance) combination over 1..5 in lexicographic order; the class is
L, R or B according to which side has the larger weight * distance torque.
Its rows are reproduced here in the same order, so no download is needed.

    python scripts/make_balance_scale.py data/balance-scale.csv
"""

import itertools
import json
import sys
from pathlib import Path

COLUMNS = ("left_weight", "left_distance", "right_weight", "right_distance")


def balance_scale_rows():
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        label = "L" if left > right else "R" if right > left else "B"
        yield label, lw, ld, rw, rd


def write(path):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("class," + ",".join(COLUMNS) + "\n")
        for row in balance_scale_rows():
            fh.write(",".join(map(str, row)) + "\n")
    schema = {"class": "label", **{c: "categorical" for c in COLUMNS}}
    schema_path = path.with_name(path.name.split(".")[0] + ".schema.json")
    schema_path.write_text(json.dumps(schema, indent=2) + "\n", encoding="utf-8")
    return path, schema_path


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "data/balance-scale.csv"
    for p in write(out):
        print(p)
