"""Exit criteria for the toolkit, runnable from pytest or ``tiltgait check``.

Every check returns a :class:`CriterionResult`; tolerances and runtime limits
are fixed here, not configurable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tiltgait.explorer import lattice, survey_region
from tiltgait.invertibility import (
    ADMISSIBLE_REGION,
    INTEREST_REGION,
    GaitRestriction,
    Restriction,
    determinant_general,
    in_triangle,
    paper_polynomial_level,
    proportionality_report,
    zero_set_agreement,
)
from tiltgait.linearization import (
    SingularDecoupling,
    build_decoupling,
    invert_allocate,
    output_second_derivative,
)
from tiltgait.simulator import SimConfig, Verdict, run, step, zero_input
from tiltgait.vehicle import (
    ROTOR_SIGNS,
    Gait,
    VehicleParams,
    VehicleState,
    hover_speed,
    rotation_matrix,
    translational_accel,
)

GAIT_1 = Gait((-0.1, 0.1, -0.2, 0.1))
GAIT_2 = Gait((-0.15, -0.1, 0.3, -0.1))

# one alpha1 = 0 case (shared by all restrictions) plus one non-zero alpha1 per restriction
SURVEY_CASES = (
    GaitRestriction(Restriction.EQUAL, 0.0),
    GaitRestriction(Restriction.EQUAL, 0.15),
    GaitRestriction(Restriction.HALF, 0.2),
    GaitRestriction(Restriction.NEGATIVE, 0.7),
    GaitRestriction(Restriction.NEGATIVE_HALF, 0.15),
)
EXCEPTION_CASE = GaitRestriction(Restriction.HALF, 0.2)
SURVEY_PITCH = 0.25


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    elapsed: float
    limit: float
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        head = f"[{status}] {self.number}. {self.title} ({self.elapsed:.3g} s / limit {self.limit:g} s)"
        return "\n".join([head] + [f"       {d}" for d in self.details])


def _best_time(fn: Callable[[], object], repeat: int = 5) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def criterion_determinant() -> CriterionResult:
    zero = (0.0, 0.0, 0.0, 0.0)
    det = determinant_general(zero, 0.0, 0.0)
    poly = paper_polynomial_level(zero)
    elapsed = _best_time(lambda: (determinant_general(zero, 0.0, 0.0), paper_polynomial_level(zero)))
    ok = det != 0.0 and poly == 4.000 and elapsed < 1e-3
    return CriterionResult(
        1, "determinant ground truth at the zero gait", ok, elapsed, 1e-3,
        [f"determinant = {det:.6e}, printed polynomial = {poly!r}"],
    )  # fmt: skip


def criterion_zero_set() -> CriterionResult:
    t0 = time.perf_counter()
    agreement = zero_set_agreement(n_segments=100, seed=0, tolerance=1e-3)
    report = proportionality_report(n=1000, seed=0)
    elapsed = time.perf_counter() - t0
    details = [
        f"roots: determinant {agreement.n_roots_det}, polynomial {agreement.n_roots_poly}; "
        f"max offset {agreement.max_offset:.2e} (tol 1e-3); unmatched {len(agreement.unmatched)}",
        *("discrepancy report: " + line for line in report.lines()),
    ]
    ok = agreement.agrees and elapsed < 10.0
    return CriterionResult(2, "zero-set agreement with the printed polynomial", ok, elapsed, 10.0, details)


def warm_up() -> None:
    """Load (or compile) the flight kernel so timings measure flights only."""
    run(SimConfig(duration=1e-3))


def _flight(number: int, name: str, gait: Gait) -> CriterionResult:
    config = SimConfig(gait=gait)
    warm_up()
    t0 = time.perf_counter()
    telemetry, c = run(config)
    elapsed = time.perf_counter() - t0
    window = telemetry["t"] >= telemetry.duration - 2.0 - 0.5 * config.dt
    att = max(float(np.max(np.abs(telemetry[k][window]))) for k in ("phi", "theta", "psi")) if window.any() else np.inf
    alt = float(np.max(np.abs(telemetry["z"][window]))) if window.any() else np.inf
    ok = (
        c.verdict is Verdict.STABLE
        and att <= 0.02
        and alt <= 0.05
        and c.min_abs_rotor_speed > 1.0
        and elapsed < 5.0
    )
    details = [
        f"verdict {c.verdict.value} ({c.reason.value}), t_end {c.t_end:.3f} s",
        f"final-2 s max attitude error {att:.4g} rad (<= 0.02), altitude error {alt:.4g} m (<= 0.05)",
        f"min |rotor speed| {c.min_abs_rotor_speed:.2f} rad/s (> 1)",
    ]
    return CriterionResult(number, f"{name} flight {gait.alpha}", ok, elapsed, 5.0, details)


def criterion_gait1() -> CriterionResult:
    return _flight(3, "Gait 1", GAIT_1)


def criterion_gait2() -> CriterionResult:
    return _flight(4, "Gait 2", GAIT_2)


def criterion_region(workers: int = 1) -> CriterionResult:
    warm_up()
    t0 = time.perf_counter()
    grid = lattice(SURVEY_PITCH, INTEREST_REGION)
    details, ok = [], True
    for case in SURVEY_CASES:
        report = survey_region(case, grid, SimConfig(), workers=workers)
        inside = [s for s in report.samples if in_triangle((s.alpha2, s.alpha4), ADMISSIBLE_REGION, tol=1e-9)]
        n_bad_inside = sum(not s.stable for s in inside)
        if case == EXCEPTION_CASE:
            case_ok = len(report.unstable) >= 1
        else:
            case_ok = n_bad_inside == 0
        ok &= case_ok
        details.append(
            f"({case.alpha1:g}, {case.alpha3:g}) {case.kind.value}: {len(report.samples)} samples, "
            f"{len(report.unstable)} non-Stable overall, {n_bad_inside}/{len(inside)} non-Stable inside "
            f"the 1.3 triangle -> {'ok' if case_ok else 'FAIL'}"
        )
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 900.0
    return CriterionResult(5, f"admissible region survey (pitch {SURVEY_PITCH})", ok, elapsed, 900.0, details)


def hover_state(params: VehicleParams = VehicleParams()) -> VehicleState:
    return VehicleState(varpi=hover_speed(params) * ROTOR_SIGNS)


def criterion_hover() -> CriterionResult:
    params = VehicleParams()
    closed_form = float(np.sqrt(params.m * params.g / (4.0 * params.K_f)))
    state = hover_state(params)
    gait = Gait.zero()
    accel = translational_accel(state, gait, params)
    elapsed = _best_time(lambda: (hover_speed(params), translational_accel(state, gait, params)))
    speed = hover_speed(params)
    ok = abs(speed - closed_form) <= 1e-12 * closed_form and abs(speed - 361.4) < 0.05
    ok &= float(np.max(np.abs(accel))) < 1e-9 and elapsed < 1e-3
    return CriterionResult(
        6, "hover oracle", ok, elapsed, 1e-3,
        [f"hover speed {speed:.4f} rad/s (closed form {closed_form:.4f}), |accel| {np.max(np.abs(accel)):.2e}"],
    )  # fmt: skip


def criterion_free_fall() -> CriterionResult:
    params, gait = VehicleParams(), Gait.zero()
    R0 = rotation_matrix(0.1, -0.2, 0.3)
    state = VehicleState(R=R0, varpi=np.zeros(4))
    t0 = time.perf_counter()
    for _ in range(1000):
        state = step(state, zero_input, 1e-3, gait, params)
    elapsed = time.perf_counter() - t0
    z_exact = -0.5 * params.g * 1.0**2
    rel = abs(state.P[2] - z_exact) / abs(z_exact)
    drift = float(np.max(np.abs(state.R - R0)))
    ok = rel <= 1e-6 and drift <= 1e-12 and elapsed < 1.0
    return CriterionResult(
        7, "free-fall oracle", ok, elapsed, 1.0,
        [f"z(1 s) = {state.P[2]:.12f} (exact {z_exact}), rel err {rel:.1e}; attitude drift {drift:.1e}"],
    )  # fmt: skip


def random_state(rng: np.random.Generator) -> tuple[VehicleState, Gait]:
    gait = Gait(tuple(rng.uniform(-0.5, 0.5, 4)))
    state = VehicleState(
        P=rng.normal(size=3),
        V=rng.normal(size=3),
        R=rotation_matrix(*rng.uniform(-0.4, 0.4, 2), rng.uniform(-np.pi, np.pi)),
        omega_B=rng.uniform(-1.0, 1.0, 3),
        varpi=rng.uniform(200.0, 500.0, 4) * ROTOR_SIGNS,
    )
    return state, gait


def jerk_error(state: VehicleState, gait: Gait, params: VehicleParams, jerk: np.ndarray, dt: float) -> float:
    """|finite-difference output jerk over one step - commanded jerk|."""
    dm = build_decoupling(state, gait, params)
    U = invert_allocate(dm, jerk)
    after = step(state, lambda s: U, dt, gait, params)
    fd = (output_second_derivative(after, gait, params) - output_second_derivative(state, gait, params)) / dt
    return float(np.linalg.norm(fd - jerk))


def criterion_linearization() -> CriterionResult:
    params = VehicleParams()
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_residual, ratios, rel_errors = 0.0, [], []
    n = 0
    while n < 100:
        state, gait = random_state(rng)
        dm = build_decoupling(state, gait, params)
        if not abs(dm.det) > 1e-18:
            continue
        n += 1
        jerk = rng.normal(scale=10.0, size=4)
        U = invert_allocate(dm, jerk)
        residual = np.linalg.norm(dm.delta @ U + dm.Ma - jerk) / np.linalg.norm(jerk)
        worst_residual = max(worst_residual, float(residual))
        e1 = jerk_error(state, gait, params, jerk, 1e-3)
        e2 = jerk_error(state, gait, params, jerk, 5e-4)
        ratios.append(e1 / e2)
        rel_errors.append(e1 / np.linalg.norm(jerk))
    elapsed = time.perf_counter() - t0
    ratios = np.array(ratios)
    ok = worst_residual < 1e-9 and np.all((ratios > 1.8) & (ratios < 2.2)) and elapsed < 30.0
    return CriterionResult(
        8, "linearization exactness on 100 random states", ok, elapsed, 30.0,
        [
            f"max relative residual {worst_residual:.2e} (< 1e-9)",
            f"jerk error ratio dt/(dt/2): min {ratios.min():.3f}, max {ratios.max():.3f} (first order -> 2)",
            f"max relative jerk error at dt=1e-3: {max(rel_errors):.2e}",
        ],
    )  # fmt: skip


def criterion_singular() -> CriterionResult:
    params, gait = VehicleParams(), GAIT_1
    state = VehicleState(varpi=np.array([-300.0, 0.0, -300.0, 300.0]))

    def check():
        dm = build_decoupling(state, gait, params)
        try:
            invert_allocate(dm, np.ones(4))
        except SingularDecoupling:
            return dm.det, True
        return dm.det, False

    det, raised = check()
    elapsed = _best_time(check)
    ok = det == 0.0 and raised and elapsed < 1e-3
    return CriterionResult(
        9, "singularity detection", ok, elapsed, 1e-3,
        [f"det with a stopped rotor = {det!r}; SingularDecoupling raised: {raised}"],
    )  # fmt: skip


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_determinant,
    2: criterion_zero_set,
    3: criterion_gait1,
    4: criterion_gait2,
    5: criterion_region,
    6: criterion_hover,
    7: criterion_free_fall,
    8: criterion_linearization,
    9: criterion_singular,
}


def run_all(numbers=None, echo: Callable[[str], None] = print, workers: int = 1) -> list[CriterionResult]:
    results = []
    for number in numbers or sorted(CRITERIA):
        result = criterion_region(workers) if number == 5 else CRITERIA[number]()
        echo(result.line())
        results.append(result)
    return results
