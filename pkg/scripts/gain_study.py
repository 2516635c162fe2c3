"""Flights and coarse region surveys under the default gains and under
triple-pole (s + p)^3 gains, plus the level-hover rotor trims per survey case.

    python scripts/gain_study.py [--poles 2 4] [--pitch 0.25]
"""

import argparse
import time

import numpy as np

from tiltgait import ControlGains, SimConfig, VehicleParams, run
from tiltgait.acceptance import GAIT_1, GAIT_2, SURVEY_CASES
from tiltgait.explorer import lattice, survey_region
from tiltgait.invertibility import ADMISSIBLE_REGION, in_triangle
from tiltgait.linearization import core_matrix


def triple_pole(p: float) -> ControlGains:
    k1, k2, k3 = 3 * p, 3 * p * p, p**3
    return ControlGains(K_P1=k1, K_P2=k2, K_P3=k3, K_PZ1=k1, K_PZ2=k2, K_PZ3=k3)


def hover_trim(gait, params=VehicleParams()) -> np.ndarray:
    """Signed rotor speeds holding a level hover with this gait."""
    w = np.linalg.solve(core_matrix(np.eye(3), gait, params), [0.0, 0.0, 0.0, params.g])
    return np.sign(w) * np.sqrt(np.abs(w))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--poles", type=float, nargs="*", default=[2.0, 4.0])
    ap.add_argument("--pitch", type=float, default=0.25)
    args = ap.parse_args()

    gain_sets = {"default": ControlGains()}
    gain_sets.update({f"(s+{p:g})^3": triple_pole(p) for p in args.poles})
    grid = lattice(args.pitch)

    for name, gains in gain_sets.items():
        print(f"== gains {name}: Hurwitz per channel {gains.is_hurwitz()}")
        for gait in (GAIT_1, GAIT_2):
            _, v = run(SimConfig(gait=gait, gains=gains))
            print(
                f"  flight {gait.alpha}: {v.verdict.value} ({v.reason.value}) "
                f"att {v.max_attitude_error:.3g} rad, alt {v.max_altitude_error:.3g} m"
            )
        t0 = time.perf_counter()
        for case in SURVEY_CASES:
            report = survey_region(case, grid, SimConfig(gains=gains))
            inside = [s for s in report.unstable if in_triangle((s.alpha2, s.alpha4), ADMISSIBLE_REGION, tol=1e-9)]
            reasons = sorted({s.classification.reason.value for s in report.unstable})
            print(
                f"  survey ({case.alpha1:g}, {case.alpha3:g}) {case.kind.value}: "
                f"{len(report.unstable)}/{len(grid)} non-Stable, {len(inside)} inside the 1.3 triangle {reasons}"
            )
        print(f"  survey time {time.perf_counter() - t0:.1f} s")

    print("== level-hover trims at the survey origins (signed rad/s; flights start at 300 * (-,+,-,+))")
    for case in SURVEY_CASES:
        print(f"  ({case.alpha1:g}, {case.alpha3:g}) {case.kind.value}: {np.round(hover_trim(case.gait(0.0, 0.0)), 1)}")


if __name__ == "__main__":
    main()
