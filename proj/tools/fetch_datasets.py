#!/usr/bin/env python3
"""Download the two UCI benchmark tables used by the acceptance checks.

Writes data/ecoli.csv (336 rows, 7 features, 8 classes) and
data/concrete.csv (1030 rows, 8 features, real-valued target). Needs
network access to archive.ics.uci.edu; reading the concrete spreadsheet
additionally needs pandas with an xls engine (pip install pandas xlrd).
"""

import csv
import io
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
ECOLI_URL = f"{UCI}/ecoli/ecoli.data"
CONCRETE_URL = f"{UCI}/concrete/compressive/Concrete_Data.xls"

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

ECOLI_COLUMNS = ["mcg", "gvh", "lip", "chg", "aac", "alm1", "alm2", "class"]
CONCRETE_COLUMNS = [
    "cement",
    "blast_furnace_slag",
    "fly_ash",
    "water",
    "superplasticizer",
    "coarse_aggregate",
    "fine_aggregate",
    "age",
    "strength",
]


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def write_ecoli() -> None:
    raw = fetch(ECOLI_URL).decode("ascii")
    out = DATA_DIR / "ecoli.csv"
    with out.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ECOLI_COLUMNS)
        rows = 0
        for line in raw.splitlines():
            fields = line.split()
            if not fields:
                continue
            # First field is the sequence name, not a feature.
            writer.writerow(fields[1:])
            rows += 1
    print(f"wrote {out} ({rows} rows)")


def write_concrete() -> None:
    try:
        import pandas as pd
    except ImportError:
        sys.exit("concrete needs pandas (pip install pandas xlrd)")
    raw = fetch(CONCRETE_URL)
    frame = pd.read_excel(io.BytesIO(raw))
    frame.columns = CONCRETE_COLUMNS
    out = DATA_DIR / "concrete.csv"
    frame.to_csv(out, index=False)
    print(f"wrote {out} ({len(frame)} rows)")


def main() -> None:
    DATA_DIR.mkdir(exist_ok=True)
    write_ecoli()
    write_concrete()


if __name__ == "__main__":
    main()
