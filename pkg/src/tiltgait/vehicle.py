"""Rigid-body model of a quadrotor with four fixed tilt angles.

Frames: ``R`` maps body-frame vectors to the inertial frame (ZYX Euler
convention). Rotor ``i`` spins with signed speed ``varpi[i]``; rotors 1 and 3
turn negative, 2 and 4 positive. Thrust and torque are linear in the signed
squares ``w = varpi * |varpi|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

# Rotor spin signs at initialization: (-, +, -, +).
ROTOR_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0])


@dataclass(frozen=True)
class VehicleParams:
    m: float = 0.429
    L: float = 0.1785
    g: float = 9.8
    I_B: tuple[float, float, float] = (2.24e-3, 2.99e-3, 4.80e-3)
    K_f: float = 8.048e-6
    K_m: float = 2.423e-7

    def __post_init__(self):
        values = (self.m, self.L, self.g, self.K_f, self.K_m, *self.I_B)
        if len(self.I_B) != 3:
            raise ValueError("I_B must hold the three diagonal inertia entries")
        if not all(np.isfinite(v) and v > 0 for v in values):
            raise ValueError(f"vehicle parameters must be finite and positive: {self}")

    @property
    def inertia(self) -> np.ndarray:
        return np.diag(self.I_B)

    @property
    def inv_inertia(self) -> np.ndarray:
        """Elementwise reciprocal of the diagonal inertia, shape (3,)."""
        return 1.0 / np.asarray(self.I_B, dtype=float)


@dataclass(frozen=True)
class Gait:
    """Tilt angles (rad) of the four rotors, held constant for a flight."""

    alpha: tuple[float, float, float, float]

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        if len(a) != 4:
            raise ValueError("a gait has exactly four tilt angles")
        if not all(np.isfinite(x) and abs(x) <= np.pi for x in a):
            raise ValueError(f"tilt angles must be finite and within [-pi, pi]: {a}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def zero(cls) -> "Gait":
        return cls((0.0, 0.0, 0.0, 0.0))

    def as_array(self) -> np.ndarray:
        return np.array(self.alpha)


@dataclass
class VehicleState:
    """Full simulator state. ``R`` is body-to-inertial."""

    P: np.ndarray = field(default_factory=lambda: np.zeros(3))
    V: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega_B: np.ndarray = field(default_factory=lambda: np.zeros(3))
    varpi: np.ndarray = field(default_factory=lambda: 300.0 * ROTOR_SIGNS)
    t: float = 0.0

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float).reshape(3)
        self.V = np.asarray(self.V, dtype=float).reshape(3)
        self.R = np.asarray(self.R, dtype=float).reshape(3, 3)
        self.omega_B = np.asarray(self.omega_B, dtype=float).reshape(3)
        self.varpi = np.asarray(self.varpi, dtype=float).reshape(4)
        self.t = float(self.t)

    def copy(self, **changes) -> "VehicleState":
        base = replace(
            self,
            P=self.P.copy(),
            V=self.V.copy(),
            R=self.R.copy(),
            omega_B=self.omega_B.copy(),
            varpi=self.varpi.copy(),
        )
        return replace(base, **changes) if changes else base

    @property
    def euler(self) -> np.ndarray:
        return euler_from_matrix(self.R)

    @property
    def w(self) -> np.ndarray:
        return signed_square(self.varpi)


def hat(v) -> np.ndarray:
    """Skew matrix with ``hat(v) @ u == cross(v, u)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_matrix(phi: float, theta: float, psi: float) -> np.ndarray:
    sph, cph = np.sin(phi), np.cos(phi)
    sth, cth = np.sin(theta), np.cos(theta)
    sps, cps = np.sin(psi), np.cos(psi)
    return np.array(
        [
            [cth * cps, sph * sth * cps - cph * sps, cph * sth * cps + sph * sps],
            [cth * sps, sph * sth * sps + cph * cps, cph * sth * sps - sph * cps],
            [-sth, sph * cth, cph * cth],
        ]
    )


def euler_from_matrix(R: np.ndarray) -> np.ndarray:
    """(roll, pitch, yaw) of a ZYX rotation matrix; pitch in [-pi/2, pi/2]."""
    sth = min(1.0, max(-1.0, -R[2, 0]))
    return np.array(
        [np.arctan2(R[2, 1], R[2, 2]), np.arcsin(sth), np.arctan2(R[1, 0], R[0, 0])]
    )


def signed_square(varpi) -> np.ndarray:
    varpi = np.asarray(varpi, dtype=float)
    return varpi * np.abs(varpi)


def thrust_matrix(alpha, params: VehicleParams) -> np.ndarray:
    """Thrust map for arbitrary (unbounded) tilt angles, shape (3, 4)."""
    s = np.sin(alpha)
    c = np.cos(alpha)
    return params.K_f * np.array(
        [
            [0.0, s[1], 0.0, -s[3]],
            [s[0], 0.0, -s[2], 0.0],
            [-c[0], c[1], -c[2], c[3]],
        ]
    )


def torque_matrix(alpha, params: VehicleParams) -> np.ndarray:
    """Torque map for arbitrary (unbounded) tilt angles, shape (3, 4)."""
    s = np.sin(alpha)
    c = np.cos(alpha)
    lk, km = params.L * params.K_f, params.K_m
    return np.array(
        [
            [0.0, lk * c[1] - km * s[1], 0.0, -lk * c[3] + km * s[3]],
            [lk * c[0] + km * s[0], 0.0, -lk * c[2] - km * s[2], 0.0],
            [
                lk * s[0] - km * c[0],
                -lk * s[1] - km * c[1],
                lk * s[2] - km * c[2],
                -lk * s[3] - km * c[3],
            ],
        ]
    )


# Gait and params are frozen, so the maps are cached per flight; the cached
# arrays are read-only to keep callers from mutating shared state.
@lru_cache(maxsize=256)
def thrust_map(gait: Gait, params: VehicleParams) -> np.ndarray:
    F = thrust_matrix(gait.alpha, params)
    F.setflags(write=False)
    return F


@lru_cache(maxsize=256)
def torque_map(gait: Gait, params: VehicleParams) -> np.ndarray:
    T = torque_matrix(gait.alpha, params)
    T.setflags(write=False)
    return T


def translational_accel(state: VehicleState, gait: Gait, params: VehicleParams) -> np.ndarray:
    thrust = state.R @ (thrust_map(gait, params) @ state.w)
    return np.array([0.0, 0.0, -params.g]) + thrust / params.m


def angular_accel(state: VehicleState, gait: Gait, params: VehicleParams) -> np.ndarray:
    return params.inv_inertia * (torque_map(gait, params) @ state.w)


def hover_speed(params: VehicleParams) -> float:
    """Rotor speed magnitude balancing gravity for the zero gait, level attitude."""
    return float(np.sqrt(params.m * params.g / (4.0 * params.K_f)))
