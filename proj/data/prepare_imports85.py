#!/usr/bin/env python3
"""Convert the UCI imports-85.data file into imports-85.csv plus a schema.

Rows with any missing value ('?') are dropped here so the level lists in the
schema only contain labels that occur in the complete rows (159 cars).
num-of-cylinders is spelled out in the raw file and becomes a number.
"""
import csv
import json
import sys
from pathlib import Path

COLUMNS = [
    "symboling", "normalized-losses", "make", "fuel-type", "aspiration",
    "num-of-doors", "body-style", "drive-wheels", "engine-location",
    "wheel-base", "length", "width", "height", "curb-weight", "engine-type",
    "num-of-cylinders", "engine-size", "fuel-system", "bore", "stroke",
    "compression-ratio", "horsepower", "peak-rpm", "city-mpg", "highway-mpg",
    "price",
]
CATEGORICAL = {
    "make", "fuel-type", "aspiration", "num-of-doors", "body-style",
    "drive-wheels", "engine-location", "engine-type", "fuel-system",
}
CYLINDERS = {"two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
             "eight": 8, "twelve": 12}


def main(argv):
    here = Path(__file__).resolve().parent
    src = Path(argv[1]) if len(argv) > 1 else here / "imports-85.data"
    with open(src, newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    complete = [r for r in rows if "?" not in r]
    cyl = COLUMNS.index("num-of-cylinders")
    for r in complete:
        r[cyl] = str(CYLINDERS[r[cyl]])

    with open(here / "imports-85.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(complete)

    schema_cols = []
    for i, name in enumerate(COLUMNS):
        if name == "price":
            schema_cols.append({"name": name, "kind": "response"})
        elif name in CATEGORICAL:
            levels = sorted({r[i] for r in complete})
            schema_cols.append({"name": name, "kind": "categorical", "levels": levels})
        else:
            schema_cols.append({"name": name, "kind": "ordered"})
    schema = {"header": True, "missing_token": "?", "columns": schema_cols,
              "response": {"kind": "numeric"}}
    with open(here / "imports-85.schema.json", "w") as f:
        json.dump(schema, f, indent=2)
        f.write("\n")
    print(f"{len(complete)} of {len(rows)} rows kept")


if __name__ == "__main__":
    main(sys.argv)
