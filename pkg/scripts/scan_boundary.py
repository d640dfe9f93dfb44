"""Scan (N, alpha^2) feasibility and compare the empirical boundary to (N-1)/N.

Writes results/scan_boundary.csv (one row per grid point) and prints a summary.
"""

import argparse
import csv
from pathlib import Path

from onticlab.cli import alpha2_grid
from onticlab.construction import empirical_boundary, feasible_overlap_bound, scan_feasibility

OUT = Path(__file__).resolve().parent.parent / "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N-max", type=int, default=12)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    rows = scan_feasibility(range(2, args.N_max + 1), alpha2_grid(args.step), args.workers)
    OUT.mkdir(exist_ok=True)
    path = OUT / "scan_boundary.csv"
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)

    print(f"{'N':>3} {'empirical':>10} {'(N-1)/N':>10} {'gap':>8}")
    for N, best in sorted(empirical_boundary(rows).items()):
        bound = feasible_overlap_bound(N)
        gap = "-" if best is None else f"{bound - best:.4f}"
        print(f"{N:>3} {best if best is not None else '-':>10} {bound:>10.4f} {gap:>8}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
