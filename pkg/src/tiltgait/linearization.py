"""Dynamic inversion of the attitude-altitude outputs.

Outputs are ``y = (phi, theta, psi, z)``. The controller treats Euler rates as
body rates, so ``y''`` for the attitude channels equals the body angular
acceleration. Differentiating once more exposes the rotor accelerations
``U = d(varpi)/dt`` through the 4x4 decoupling matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tiltgait.vehicle import (
    Gait,
    VehicleParams,
    VehicleState,
    hat,
    signed_square,
    thrust_map,
    torque_map,
)

# |det| below this aborts the flight; the matrix's natural scale is ~1e-4.
DEFAULT_SINGULAR_THRESHOLD = 1e-18


class SingularDecoupling(ArithmeticError):
    """The decoupling matrix has lost rank; the flight must abort."""

    def __init__(self, det: float, threshold: float):
        super().__init__(f"decoupling matrix singular: |det|={abs(det):.3e} <= {threshold:.1e}")
        self.det = det
        self.threshold = threshold


@dataclass(frozen=True)
class DecouplingMatrix:
    delta: np.ndarray
    Ma: np.ndarray
    det: float
    cond: float


def core_matrix(R: np.ndarray, gait: Gait, params: VehicleParams) -> np.ndarray:
    """``y''`` per unit signed square: body angular rows over the altitude row."""
    torque_rows = params.inv_inertia[:, None] * torque_map(gait, params)
    altitude_row = (R[2] @ thrust_map(gait, params)) / params.m
    return np.vstack([torque_rows, altitude_row])


def output_second_derivative(state: VehicleState, gait: Gait, params: VehicleParams) -> np.ndarray:
    ydd = core_matrix(state.R, gait, params) @ state.w
    ydd[3] -= params.g
    return ydd


def drift_term(state: VehicleState, gait: Gait, params: VehicleParams) -> np.ndarray:
    Ma = np.zeros(4)
    body_force = thrust_map(gait, params) @ state.w
    Ma[3] = state.R[2] @ (hat(state.omega_B) @ body_force) / params.m
    return Ma


def build_decoupling(
    state: VehicleState, gait: Gait, params: VehicleParams, with_cond: bool = True
) -> DecouplingMatrix:
    """Decoupling matrix, drift term and diagnostics at ``state``.

    ``with_cond=False`` skips the SVD-based condition number (reported as nan).
    """
    return decoupling_from_core(core_matrix(state.R, gait, params), state, gait, params, with_cond)


def decoupling_from_core(core, state, gait, params, with_cond: bool = True) -> DecouplingMatrix:
    # d(varpi |varpi|)/dt = 2 |varpi| d(varpi)/dt for either spin direction
    delta = core * (2.0 * np.abs(state.varpi))
    det = float(np.linalg.det(delta))
    cond = float("nan")
    if with_cond:
        cond = float(np.linalg.cond(delta)) if det != 0.0 else float("inf")
    return DecouplingMatrix(delta=delta, Ma=drift_term(state, gait, params), det=det, cond=cond)


def invert_allocate(
    dm: DecouplingMatrix,
    y_triple_desired,
    threshold: float = DEFAULT_SINGULAR_THRESHOLD,
) -> np.ndarray:
    """Rotor accelerations realizing the commanded output jerk.

    Raises SingularDecoupling when ``|det| <= threshold``.
    """
    if not abs(dm.det) > threshold:
        raise SingularDecoupling(dm.det, threshold)
    rhs = np.asarray(y_triple_desired, dtype=float) - dm.Ma
    # LU with partial pivoting (LAPACK gesv)
    return np.linalg.solve(dm.delta, rhs)


def signed_square_rate(varpi, varpi_dot) -> np.ndarray:
    return 2.0 * np.abs(np.asarray(varpi, dtype=float)) * np.asarray(varpi_dot, dtype=float)


__all__ = [
    "DEFAULT_SINGULAR_THRESHOLD",
    "DecouplingMatrix",
    "SingularDecoupling",
    "build_decoupling",
    "core_matrix",
    "decoupling_from_core",
    "drift_term",
    "invert_allocate",
    "output_second_derivative",
    "signed_square",
    "signed_square_rate",
]
