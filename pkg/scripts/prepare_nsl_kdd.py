"""Combine the NSL-KDD KDDTrain+ / KDDTest+ text files into one 41-feature CSV.

The raw files carry 43 fields per row: 41 features, the attack name and a
difficulty score. The difficulty column is dropped; attack names are kept
(the loader collapses every non-"normal" name to Malicious).

    python3 scripts/prepare_nsl_kdd.py KDDTrain+.txt KDDTest+.txt -o nsl_kdd.csv
    MIMIC_IDS_KDD=nsl_kdd.csv pytest tests/test_acceptance.py -s
"""

import argparse
import csv
import sys


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--out", required=True)
    args = ap.parse_args(argv)
    n = 0
    with open(args.out, "w", newline="") as out:
        w = csv.writer(out, lineterminator="\n")
        for path in args.inputs:
            with open(path, newline="") as fh:
                for lineno, row in enumerate(csv.reader(fh), 1):
                    if not row:
                        continue
                    if len(row) == 43:
                        row = row[:42]
                    if len(row) != 42:
                        sys.exit(f"{path}:{lineno}: expected 42 or 43 fields, got {len(row)}")
                    w.writerow(row)
                    n += 1
    print(f"wrote {n} rows to {args.out}")


if __name__ == "__main__":
    main()
