#!/usr/bin/env python3
"""Regenerate the CSV snapshots under data/ from scikit-learn's bundled datasets.

The library itself never touches the network or scikit-learn; it only reads
these CSVs. Run this once if you need to rebuild them:

    python3 scripts/fetch_data.py [--out data]

Snapshot layout (header row, then one row per sample, `label` column last):
  cancer.csv  569 rows, 30 feature columns (diagnostic measurements), label 0/1
              (0 = malignant, 1 = benign; 1 is the positive class downstream)
  wines.csv   178 rows, 13 feature columns, label 0/1/2
  digits.csv  1797 rows, 64 pixel columns p00..p63 (8x8 row-major, intensities
              rescaled from 0..16 to [0,1]), label 0..9

Any extra image dataset exported in the digits.csv layout (pXX columns plus a
label column) loads through the same reader.
"""

import argparse
import csv
import os

from sklearn import datasets


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows, {len(header)} cols)")


def fmt(x):
    return repr(float(x))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    cancer = datasets.load_breast_cancer()
    header = list(cancer.feature_names) + ["label"]
    rows = [[fmt(v) for v in x] + [int(y)] for x, y in zip(cancer.data, cancer.target)]
    write_csv(os.path.join(args.out, "cancer.csv"), header, rows)

    wine = datasets.load_wine()
    header = list(wine.feature_names) + ["label"]
    rows = [[fmt(v) for v in x] + [int(y)] for x, y in zip(wine.data, wine.target)]
    write_csv(os.path.join(args.out, "wines.csv"), header, rows)

    digits = datasets.load_digits()
    header = [f"p{i:02d}" for i in range(64)] + ["label"]
    rows = [
        [fmt(v / 16.0) for v in x] + [int(y)]
        for x, y in zip(digits.data, digits.target)
    ]
    write_csv(os.path.join(args.out, "digits.csv"), header, rows)


if __name__ == "__main__":
    main()
