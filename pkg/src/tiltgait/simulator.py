"""Closed-loop flight simulation and stability classification.

The truth model integrates the rotation matrix directly (``dR/dt = R hat(w)``)
while the controller works on Euler angles extracted from it. Rotor
accelerations are held constant across each RK4 step.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from tiltgait.controller import ControlGains, Reference, output_command
from tiltgait.linearization import (
    DEFAULT_SINGULAR_THRESHOLD,
    DecouplingMatrix,
    SingularDecoupling,
    build_decoupling,
    core_matrix,
    decoupling_from_core,
    invert_allocate,
    output_second_derivative,
)
from tiltgait.vehicle import (
    ROTOR_SIGNS,
    Gait,
    VehicleParams,
    VehicleState,
    euler_from_matrix,
    rotation_matrix,
    thrust_map,
    torque_map,
)

TELEMETRY_COLUMNS = (
    "t", "phi", "theta", "psi", "z", "p", "q", "r", "vz",
    "w1", "w2", "w3", "w4", "det", "Ma4", "x", "y", "vx", "vy",
)  # fmt: skip


class Verdict(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    SINGULAR_ABORT = "SingularAbort"


class Reason(str, enum.Enum):
    SETTLED = "Settled"
    NOT_SETTLED = "NotSettled"
    DIVERGED = "Diverged"
    GIMBAL_LIMIT = "GimbalLimit"
    SINGULAR_MATRIX = "SingularMatrix"
    ROTOR_ZERO_CROSSING = "RotorZeroCrossing"


@dataclass(frozen=True)
class Thresholds:
    singular_det: float = DEFAULT_SINGULAR_THRESHOLD
    rotor_eps: float = 1.0
    settle_fraction: float = 0.2
    attitude_tol: float = 0.02
    altitude_tol: float = 0.05
    blowup: float = 1e3
    gimbal_limit: float = 1.4


@dataclass(frozen=True)
class SimConfig:
    gait: Gait = field(default_factory=Gait.zero)
    params: VehicleParams = field(default_factory=VehicleParams)
    gains: ControlGains = field(default_factory=ControlGains)
    reference: Reference = field(default_factory=Reference)
    thresholds: Thresholds = field(default_factory=Thresholds)
    dt: float = 1e-3
    duration: float = 10.0
    position0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    attitude0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    omega0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotor_speed0: float = 300.0
    rotor_speed_cap: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration >= self.dt:
            raise ValueError("duration must be at least one step")
        if self.rotor_speed_cap is not None and not self.rotor_speed_cap > 0:
            raise ValueError("rotor_speed_cap must be positive when set")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def initial_state(self) -> VehicleState:
        return VehicleState(
            P=self.position0,
            V=self.velocity0,
            R=rotation_matrix(*self.attitude0),
            omega_B=self.omega0,
            varpi=self.rotor_speed0 * ROTOR_SIGNS,
        )


@dataclass
class Telemetry:
    """One row per step in ``TELEMETRY_COLUMNS`` order."""

    data: np.ndarray
    duration: float
    dt: float
    rotor_signs: np.ndarray = field(default_factory=lambda: ROTOR_SIGNS.copy())
    columns: tuple[str, ...] = TELEMETRY_COLUMNS

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def __len__(self) -> int:
        return len(self.data)

    @property
    def rotor_speeds(self) -> np.ndarray:
        i = self.columns.index("w1")
        return self.data[:, i : i + 4]

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.data:
                writer.writerow([repr(float(v)) for v in row])
        return path


@dataclass(frozen=True)
class GaitClassification:
    verdict: Verdict
    reason: Reason
    min_abs_rotor_speed: float
    max_attitude_error: float
    max_altitude_error: float
    t_end: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason.value,
            "min_abs_rotor_speed": self.min_abs_rotor_speed,
            "max_attitude_error": self.max_attitude_error,
            "max_altitude_error": self.max_altitude_error,
            "t_end": self.t_end,
        }


# -- truth model ------------------------------------------------------------
# Flat layout: P(0:3) V(3:6) R(6:15, row-major) omega_B(15:18) varpi(18:22)


def _pack(state: VehicleState) -> np.ndarray:
    return np.concatenate([state.P, state.V, state.R.ravel(), state.omega_B, state.varpi])


def _unpack(x: np.ndarray, t: float) -> VehicleState:
    return VehicleState(P=x[0:3], V=x[3:6], R=x[6:15].reshape(3, 3), omega_B=x[15:18], varpi=x[18:22], t=t)


class _Plant:
    __slots__ = ("F", "T_scaled", "inv_m", "g")

    def __init__(self, gait: Gait, params: VehicleParams):
        self.F = thrust_map(gait, params)
        self.T_scaled = params.inv_inertia[:, None] * torque_map(gait, params)
        self.inv_m = 1.0 / params.m
        self.g = params.g

    def __call__(self, x: np.ndarray, U: np.ndarray) -> np.ndarray:
        R = x[6:15].reshape(3, 3)
        p, q, r = x[15:18]
        varpi = x[18:22]
        w = varpi * np.abs(varpi)
        dx = np.empty(22)
        dx[0:3] = x[3:6]
        dx[3:6] = (R @ (self.F @ w)) * self.inv_m
        dx[5] -= self.g
        skew = np.array([[0.0, -r, q], [r, 0.0, -p], [-q, p, 0.0]])
        dx[6:15] = (R @ skew).ravel()
        dx[15:18] = self.T_scaled @ w
        dx[18:22] = U
        return dx


def derivative(state: VehicleState, U, gait: Gait, params: VehicleParams) -> VehicleState:
    """Time derivative of every state field; ``t`` carries dt/dt = 1."""
    dx = _Plant(gait, params)(_pack(state), np.asarray(U, dtype=float))
    return _unpack(dx, 1.0)


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (polar factor).

    One Newton-Schulz sweep suffices for the ~1e-13 per-step drift of RK4;
    larger departures fall back to the SVD.
    """
    E = R.T @ R
    if np.max(np.abs(E - np.eye(3))) < 1e-6:
        return R @ (1.5 * np.eye(3) - 0.5 * E)
    u, _, vt = np.linalg.svd(R)
    Q = u @ vt
    if np.linalg.det(Q) < 0:
        u[:, -1] = -u[:, -1]
        Q = u @ vt
    return Q


def _rk4(plant: _Plant, x: np.ndarray, U: np.ndarray, dt: float) -> np.ndarray:
    k1 = plant(x, U)
    k2 = plant(x + 0.5 * dt * k1, U)
    k3 = plant(x + 0.5 * dt * k2, U)
    k4 = plant(x + dt * k3, U)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(
    state: VehicleState,
    controller: Callable[[VehicleState], np.ndarray],
    dt: float,
    gait: Gait,
    params: VehicleParams,
    rotor_speed_cap: Optional[float] = None,
) -> VehicleState:
    """Advance one RK4 step with the controller's input held over the step.

    SingularDecoupling from the controller propagates.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    U = np.asarray(controller(state), dtype=float)
    x = _rk4(_Plant(gait, params), _pack(state), U, dt)
    return _finish(x, state.t + dt, rotor_speed_cap)


def _finish(x: np.ndarray, t: float, rotor_speed_cap: Optional[float]) -> VehicleState:
    x[6:15] = orthonormalize(x[6:15].reshape(3, 3)).ravel()
    if rotor_speed_cap is not None:
        x[18:22] = np.clip(x[18:22], -rotor_speed_cap, rotor_speed_cap)
    return _unpack(x, t)


# -- control ----------------------------------------------------------------


def zero_input(state: VehicleState) -> np.ndarray:
    return np.zeros(4)


class FeedbackController:
    """Outputs -> third-order PD -> dynamic inversion -> rotor accelerations.

    ``last`` keeps the most recent decoupling diagnostics.
    """

    def __init__(
        self,
        gait: Gait,
        params: VehicleParams,
        gains: ControlGains,
        reference: Reference = Reference(),
        singular_threshold: float = DEFAULT_SINGULAR_THRESHOLD,
    ):
        self.gait = gait
        self.params = params
        self.gains = gains
        self.reference = reference
        self.singular_threshold = singular_threshold
        self.last: Optional[DecouplingMatrix] = None

    def outputs(self, state: VehicleState):
        y = np.append(euler_from_matrix(state.R), state.P[2])
        dy = np.append(state.omega_B, state.V[2])
        ddy = output_second_derivative(state, self.gait, self.params)
        return y, dy, ddy

    def desired_jerk(self, state: VehicleState) -> np.ndarray:
        return output_command(self.reference, *self.outputs(state), self.gains)

    def __call__(self, state: VehicleState) -> np.ndarray:
        self.last = build_decoupling(state, self.gait, self.params)
        return invert_allocate(self.last, self.desired_jerk(state), self.singular_threshold)


# -- flights ----------------------------------------------------------------


ENGINES = ("compiled", "python")


def run(config: SimConfig, engine: str = "compiled") -> tuple[Telemetry, GaitClassification]:
    """Fly one gait from the configured initial state and classify the flight.

    The run stops early on divergence, gimbal excursion, rotor zero crossing
    or a singular decoupling matrix; the offending row is the last telemetry
    row. ``engine="python"`` runs the step-by-step numpy reference built from
    the public model functions; ``"compiled"`` runs the same loop under numba.
    """
    if engine == "compiled":
        rows = _run_compiled(config)
    elif engine == "python":
        rows = _run_python(config)
    else:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    signs = np.sign(config.initial_state().varpi)
    telemetry = Telemetry(data=rows, duration=config.n_steps * config.dt, dt=config.dt, rotor_signs=signs)
    return telemetry, classify(telemetry, config.thresholds, config.reference)


def _run_compiled(config: SimConfig) -> np.ndarray:
    from tiltgait._kernel import closed_loop

    th, gains, ref = config.thresholds, config.gains, config.reference
    plant = _Plant(config.gait, config.params)
    n = config.n_steps
    rows = np.full((n + 1, len(TELEMETRY_COLUMNS)), np.nan)
    k1 = np.array([*gains.K_P1, gains.K_PZ1])
    k2 = np.array([*gains.K_P2, gains.K_PZ2])
    k3 = np.array([*gains.K_P3, gains.K_PZ3])
    refs = np.array([ref.y, ref.dy, ref.ddy, ref.dddy], dtype=float)
    cap = -1.0 if config.rotor_speed_cap is None else float(config.rotor_speed_cap)
    count = closed_loop(
        _pack(config.initial_state()), np.ascontiguousarray(plant.F), np.ascontiguousarray(plant.T_scaled),
        plant.inv_m, plant.g, k1, k2, k3, refs, float(config.dt), n,
        float(th.singular_det), float(th.rotor_eps), float(th.blowup), float(th.gimbal_limit), cap, rows,
    )  # fmt: skip
    return rows[:count]


def _run_python(config: SimConfig) -> np.ndarray:
    th = config.thresholds
    plant = _Plant(config.gait, config.params)
    n = config.n_steps
    rows = np.full((n + 1, len(TELEMETRY_COLUMNS)), np.nan)
    state = config.initial_state()
    signs = np.sign(state.varpi)

    for k in range(n + 1):
        state.t = k * config.dt
        y = np.append(euler_from_matrix(state.R), state.P[2])
        core = core_matrix(state.R, config.gait, config.params)
        dm = decoupling_from_core(core, state, config.gait, config.params, with_cond=False)
        rows[k] = (
            state.t, *y, *state.omega_B, state.V[2], *state.varpi,
            dm.det, dm.Ma[3], state.P[0], state.P[1], state.V[0], state.V[1],
        )  # fmt: skip
        if k == n or _should_stop(state, y, signs, dm, th):
            rows = rows[: k + 1]
            break
        ddy = core @ state.w
        ddy[3] -= config.params.g
        dy = np.append(state.omega_B, state.V[2])
        jerk = output_command(config.reference, y, dy, ddy, config.gains)
        try:
            U = invert_allocate(dm, jerk, th.singular_det)
        except SingularDecoupling:
            rows = rows[: k + 1]
            break
        x = _rk4(plant, _pack(state), U, config.dt)
        state = _finish(x, state.t + config.dt, config.rotor_speed_cap)
    return rows


def _should_stop(state, y, signs, dm, th: Thresholds) -> bool:
    if not (np.all(np.isfinite(state.P)) and np.all(np.isfinite(state.V)) and np.all(np.isfinite(state.omega_B))):
        return True
    if max(np.abs(state.P).max(), np.abs(state.V).max(), np.abs(state.omega_B).max()) > th.blowup:
        return True
    if not abs(y[1]) < th.gimbal_limit:
        return True
    if np.any(np.abs(state.varpi) < th.rotor_eps) or np.any(np.sign(state.varpi) != signs):
        return True
    return not abs(dm.det) > th.singular_det


def _wrap(angle: np.ndarray) -> np.ndarray:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


def classify(
    telemetry: Telemetry,
    thresholds: Thresholds = Thresholds(),
    reference: Reference = Reference(),
) -> GaitClassification:
    """Verdict from telemetry alone.

    Precedence: singular abort, divergence, gimbal excursion, settling.
    """
    th = thresholds
    speeds = telemetry.rotor_speeds
    finite_speeds = speeds[np.all(np.isfinite(speeds), axis=1)]
    min_speed = float(np.abs(finite_speeds).min()) if len(finite_speeds) else float("nan")
    t = telemetry["t"]
    t_end = float(t[-1]) if len(t) else 0.0

    window = t >= (1.0 - th.settle_fraction) * telemetry.duration - 0.5 * telemetry.dt
    att = np.column_stack([telemetry[c] for c in ("phi", "theta", "psi")])
    att_err = np.abs(_wrap(att[window] - np.asarray(reference.y[:3])))
    alt_err = np.abs(telemetry["z"][window] - reference.y[3])
    max_att = float(att_err.max()) if att_err.size else float("inf")
    max_alt = float(alt_err.max()) if alt_err.size else float("inf")

    def verdict(v: Verdict, r: Reason) -> GaitClassification:
        return GaitClassification(v, r, min_speed, max_att, max_alt, t_end)

    crossed = np.any(np.abs(finite_speeds) < th.rotor_eps) or np.any(
        np.sign(finite_speeds) != telemetry.rotor_signs
    )
    if crossed:
        return verdict(Verdict.SINGULAR_ABORT, Reason.ROTOR_ZERO_CROSSING)
    det = telemetry["det"]
    if np.any(np.isfinite(det) & ~(np.abs(det) > th.singular_det)):
        return verdict(Verdict.SINGULAR_ABORT, Reason.SINGULAR_MATRIX)

    magnitudes = telemetry.data[:, [TELEMETRY_COLUMNS.index(c) for c in ("x", "y", "z", "vx", "vy", "vz", "p", "q", "r")]]
    if not np.all(np.isfinite(telemetry.data[:, :13])) or np.any(np.abs(magnitudes) > th.blowup):
        return verdict(Verdict.UNSTABLE, Reason.DIVERGED)
    if np.any(np.abs(telemetry["theta"]) >= th.gimbal_limit):
        return verdict(Verdict.UNSTABLE, Reason.GIMBAL_LIMIT)

    complete = t_end >= telemetry.duration - 0.5 * telemetry.dt
    if complete and max_att <= th.attitude_tol and max_alt <= th.altitude_tol:
        return verdict(Verdict.STABLE, Reason.SETTLED)
    return verdict(Verdict.UNSTABLE, Reason.NOT_SETTLED)
