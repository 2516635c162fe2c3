"""Admissible-region survey over all twenty restriction cases (NDJSON per case).

    python scripts/sweep_regions.py --out results/regions [--pitch 0.1] [--workers 4] [--poles 4]

``--poles p`` replaces the default gains with triple-pole (s + p)^3 gains.
"""

import argparse
import json
from pathlib import Path

from tiltgait import ControlGains, SimConfig
from tiltgait.explorer import survey_region
from tiltgait.invertibility import ADMISSIBLE_REGION, RESTRICTION_CASES, GaitRestriction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/regions"))
    ap.add_argument("--pitch", type=float, default=0.1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--poles", type=float)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    gains = ControlGains()
    if args.poles:
        p = args.poles
        gains = ControlGains(K_P1=3 * p, K_P2=3 * p * p, K_P3=p**3, K_PZ1=3 * p, K_PZ2=3 * p * p, K_PZ3=p**3)
    cfg = SimConfig(gains=gains)

    for kind, values in RESTRICTION_CASES.items():
        for a1 in values:
            report = survey_region(GaitRestriction(kind, a1), None, cfg, workers=args.workers, pitch=args.pitch)
            path = args.out / f"{kind.value}_{a1:+.3f}.ndjson"
            with path.open("w") as fh:
                for rec in report.records():
                    fh.write(json.dumps(rec) + "\n")
            print(
                f"{kind.value:14s} alpha1={a1:+.3f}: {len(report.unstable)}/{len(report.samples)} non-Stable, "
                f"1.3 triangle all Stable: {report.all_stable_within(ADMISSIBLE_REGION)}, hull {report.hull_vertices()}"
            )


if __name__ == "__main__":
    main()
