"""Fly the two reference gaits and write telemetry CSVs.

    python scripts/run_gait_flights.py --out results/flights [--gains 6,12,8,6,12,8]
"""

import argparse
from pathlib import Path

from tiltgait import ControlGains, SimConfig, run
from tiltgait.acceptance import GAIT_1, GAIT_2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/flights"))
    ap.add_argument("--gains", help="K_P1,K_P2,K_P3,K_PZ1,K_PZ2,K_PZ3 (attitude gains broadcast to all axes)")
    args = ap.parse_args()

    gains = ControlGains()
    if args.gains:
        k = [float(v) for v in args.gains.split(",")]
        gains = ControlGains(K_P1=k[0], K_P2=k[1], K_P3=k[2], K_PZ1=k[3], K_PZ2=k[4], K_PZ3=k[5])

    for name, gait in (("gait1", GAIT_1), ("gait2", GAIT_2)):
        telemetry, verdict = run(SimConfig(gait=gait, gains=gains))
        path = telemetry.write_csv(args.out / f"{name}.csv")
        print(f"{name} {gait.alpha}: {verdict.verdict.value} ({verdict.reason.value}) -> {path}")


if __name__ == "__main__":
    main()
