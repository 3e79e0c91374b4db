"""Add headers to raw UCI files so ``gdsim`` can read them.

Usage::

    python scripts/prepare_uci.py hayes-roth RAW_DIR OUT_DIR
    python scripts/prepare_uci.py balance-scale RAW_DIR OUT_DIR

``hayes-roth`` expects ``hayes-roth.data`` (132 rows, leading name column)
and ``hayes-roth.test`` (28 rows, no name column) in RAW_DIR and writes the
160 combined rows without the name column, which is a per-person identifier.
``balance-scale`` expects ``balance-scale.data``. See docs/datasets.md for the
download locations.
"""

import json
import sys
from pathlib import Path

HAYES = ("hobby", "age", "educational_level", "marital_status")
BALANCE = ("left_weight", "left_distance", "right_weight", "right_distance")


def _lines(path):
    return [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]


def hayes_roth(raw, out):
    rows = []
    for ln in _lines(Path(raw) / "hayes-roth.data"):
        cells = [c.strip() for c in ln.split(",")]
        rows.append(cells[1:5] + [cells[5]])
    for ln in _lines(Path(raw) / "hayes-roth.test"):
        cells = [c.strip() for c in ln.split(",")]
        rows.append(cells[0:4] + [cells[4]])
    header = list(HAYES) + ["class"]
    schema = {**{c: "categorical" for c in HAYES}, "class": "label"}
    return _write(out, "hayes-roth", header, rows, schema)


def balance_scale(raw, out):
    rows = [[c.strip() for c in ln.split(",")] for ln in _lines(Path(raw) / "balance-scale.data")]
    header = ["class"] + list(BALANCE)
    schema = {"class": "label", **{c: "categorical" for c in BALANCE}}
    return _write(out, "balance-scale", header, rows, schema)


def _write(out, name, header, rows, schema):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    csv_path.write_text(",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows))
    schema_path = out / f"{name}.schema.json"
    schema_path.write_text(json.dumps(schema, indent=2) + "\n")
    return csv_path, schema_path


if __name__ == "__main__":
    if len(sys.argv) != 4 or sys.argv[1] not in ("hayes-roth", "balance-scale"):
        sys.exit(__doc__)
    fn = hayes_roth if sys.argv[1] == "hayes-roth" else balance_scale
    for p in fn(sys.argv[2], sys.argv[3]):
        print(p)
