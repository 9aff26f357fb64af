"""Run all three presets and print a compact table of mean rates.

    python3 scripts/run_presets.py [--out results] [--seed 1] [--jobs N]

CSV, summary CSV and SVG files land in --out, one set per preset.
"""
import argparse
import contextlib
import csv
import io
import sys
import time

from hetcache.cli import run_cli
from hetcache.harness import PRESETS


def print_table(name: str, out: str) -> None:
    with open(f"{out}/{name}_summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\n{name}")
    for row in rows:
        print(f"  m={row['m']:>4} n={row['n']:>5} M={row['M']:>5} m1={row['m1']:>4} k={row['k']:>4}  "
              f"mean rate {float(row['rate']):8.2f}  stderr {float(row['stderr']):.2f}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", default="1")
    parser.add_argument("--jobs", default=None)
    args = parser.parse_args()
    for name in sorted(PRESETS):
        start = time.perf_counter()
        argv = ["preset", name, "--seed", args.seed, "--out", args.out, "--plot"]
        if args.jobs:
            argv += ["--jobs", args.jobs]
        with contextlib.redirect_stdout(io.StringIO()):  # drop the config echo
            code = run_cli(argv)
        if code:
            return code
        print(f"{name}: {time.perf_counter() - start:.1f} s", file=sys.stderr)
        print_table(name, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
