"""Run the 29-strategy grid and print the median table ranked by debt.

    python3 scripts/run_grid.py --out out/ [--paths 300] [--seed 42] [--workers 1]
"""

import argparse
import csv
import sys
from pathlib import Path

from crisissim.cli import main as cli_main
from crisissim.report import SUMMARY_COLUMNS

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="out")
    ap.add_argument("--paths", type=int, default=300)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    rc = cli_main(["run", "--scenario-set", str(ROOT / "scenarios" / "grid29.cfg"), "--paths", str(args.paths),
                   "--seed", str(args.seed), "--workers", str(args.workers), "--out", args.out])
    if rc:
        return rc
    with open(Path(args.out) / "fig3_debt_ranking.csv", newline="") as fh:
        order = [r["scenario"] for r in csv.DictReader(fh)]
    with open(Path(args.out) / "summary_T40.csv", newline="") as fh:
        rows = {r["scenario"]: r for r in csv.DictReader(fh)}
    print(f"{'strategy':40s}" + "".join(f"{c:>14s}" for c in SUMMARY_COLUMNS))
    for name in order:
        print(f"{name:40s}" + "".join(f"{float(rows[name][c]):14.2f}" for c in SUMMARY_COLUMNS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
