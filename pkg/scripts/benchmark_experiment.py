"""Benchmark-scale run: 57,900 / 57,900 / 20,173 split, then the default pipeline.

    python3 scripts/benchmark_experiment.py --data nsl_kdd.csv --out runs/nsl
    python3 scripts/benchmark_experiment.py --synthetic --out runs/synth   # timing dry run

The pipeline prints the teacher and student selection tables, the test-set
comparison and the relative score difference; this script adds the wall time.
``--synthetic`` swaps in generated KDD-shaped rows; its numbers say nothing
about real traffic and only exercise the code path at full size.
"""

import argparse
import json
import time
from pathlib import Path

from mimicids.cli import main as cli
from mimicids.data import write_dataset
from mimicids.synthetic import synthetic_kdd

SPLIT = (57_900, 57_900, 20_173)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="combined 41-feature labeled CSV")
    src.add_argument("--synthetic", action="store_true")
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--config", help="optional pipeline config file")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = args.data
    if args.synthetic:
        data = str(out / "synthetic_kdd.csv")
        write_dataset(synthetic_kdd(sum(SPLIT), seed=args.seed), data)

    t0 = time.perf_counter()
    code = cli(["split", "--input", data, "--labeled-n", str(SPLIT[0]), "--unlabeled-n", str(SPLIT[1]),
                "--test-n", str(SPLIT[2]), "--seed", str(args.seed), "--out-dir", str(out / "parts")])
    if code:
        raise SystemExit(code)
    p = out / "parts"
    cmd = ["pipeline", "--sensitive", str(p / "sensitive.csv"), "--unlabeled", str(p / "unlabeled.csv"),
           "--test", str(p / "test.csv"), "--seed", str(args.seed), "--out-dir", str(out / "run")]
    if args.config:
        cmd += ["--config", args.config]
    code = cli(cmd)
    elapsed = time.perf_counter() - t0

    r = json.loads((out / "run" / "report.json").read_text())
    print(f"\nrelative score difference {r['relative_score_difference']:.6f}  "
          f"released={r['released']}  wall time {elapsed / 60:.1f} min")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
