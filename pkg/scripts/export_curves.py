"""Export determinant zero curves for every restriction case and check that
the region of interest stays clear of them.

    python scripts/export_curves.py --out results/curves [--grid-n 401]
"""

import argparse
import csv
from pathlib import Path

from tiltgait.invertibility import INTEREST_REGION, RESTRICTION_CASES, GaitRestriction, region_clear_of_curves, zero_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/curves"))
    ap.add_argument("--grid-n", type=int, default=401)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for kind, values in RESTRICTION_CASES.items():
        for a1 in values:
            restriction = GaitRestriction(kind, a1)
            curves = zero_curves(restriction, n=args.grid_n)
            path = args.out / f"{kind.value}_{a1:+.3f}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("curve_id", "alpha2", "alpha4"))
                for k, line in enumerate(curves.polylines):
                    writer.writerows((k, repr(float(x)), repr(float(y))) for x, y in line)
            clear = region_clear_of_curves(INTEREST_REGION, curves)
            print(f"{kind.value:14s} alpha1={a1:+.3f}: {len(curves)} curves, region clear: {clear} -> {path}")


if __name__ == "__main__":
    main()
