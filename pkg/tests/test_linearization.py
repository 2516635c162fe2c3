import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiltgait import (
    Gait,
    SingularDecoupling,
    VehicleParams,
    VehicleState,
    angular_accel,
    build_decoupling,
    hover_speed,
    invert_allocate,
    output_second_derivative,
    rotation_matrix,
)
from tiltgait.linearization import core_matrix, signed_square_rate
from tiltgait.vehicle import ROTOR_SIGNS, hat, thrust_map

P = VehicleParams()
angle = st.floats(-np.pi, np.pi, allow_nan=False)
small = st.floats(-3, 3, allow_nan=False)


@st.composite
def states(draw):
    alpha = tuple(draw(st.floats(-1.5, 1.5)) for _ in range(4))
    att = (draw(st.floats(-1, 1)), draw(st.floats(-1, 1)), draw(angle))
    state = VehicleState(
        R=rotation_matrix(*att),
        omega_B=[draw(small) for _ in range(3)],
        varpi=ROTOR_SIGNS * np.array([draw(st.floats(100, 600)) for _ in range(4)]),
    )
    return state, Gait(alpha)


def test_second_derivative_examples():
    state = VehicleState(R=rotation_matrix(0.3, 0.2, 0.1), varpi=np.zeros(4))
    np.testing.assert_array_equal(output_second_derivative(state, Gait((0.1, 0.2, 0.3, 0.4)), P), [0, 0, 0, -9.8])
    hover = VehicleState(varpi=hover_speed(P) * ROTOR_SIGNS)
    np.testing.assert_allclose(output_second_derivative(hover, Gait.zero(), P), 0.0, atol=1e-9)


@given(states())
def test_second_derivative_shares_angular_accel(sg):
    state, gait = sg
    # same products, associated differently: equal to rounding
    np.testing.assert_allclose(output_second_derivative(state, gait, P)[:3], angular_accel(state, gait, P), rtol=1e-13, atol=1e-12)


@given(states())
def test_decoupling_is_core_times_speed_factor(sg):
    state, gait = sg
    dm = build_decoupling(state, gait, P)
    core = core_matrix(state.R, gait, P)
    expected = np.linalg.det(core) * np.prod(2 * np.abs(state.varpi))
    assert dm.det == pytest.approx(expected, rel=1e-9)
    # columns scale with 2|varpi_i|
    np.testing.assert_allclose(dm.delta, core * 2 * np.abs(state.varpi), rtol=1e-15)


@given(states())
def test_drift_term_by_hand(sg):
    state, gait = sg
    dm = build_decoupling(state, gait, P)
    F = thrust_map(gait, P)
    expected = state.R[2] @ np.cross(state.omega_B, F @ state.w) / P.m
    np.testing.assert_allclose(dm.Ma[:3], 0.0)
    assert dm.Ma[3] == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_level_zero_gait_decoupling():
    dm = build_decoupling(VehicleState(), Gait.zero(), P)
    np.testing.assert_array_equal(dm.Ma, 0.0)
    assert dm.det != 0.0
    assert np.isfinite(dm.cond)


@pytest.mark.parametrize("i", range(4))
def test_stopped_rotor_is_exactly_singular(i):
    varpi = 300.0 * ROTOR_SIGNS
    varpi[i] = 0.0
    dm = build_decoupling(VehicleState(R=rotation_matrix(0.1, 0.2, 0.3), varpi=varpi), Gait((0.2, -0.3, 0.1, 0.4)), P)
    assert dm.det == 0.0
    np.testing.assert_array_equal(dm.delta[:, i], 0.0)
    with pytest.raises(SingularDecoupling) as info:
        invert_allocate(dm, np.ones(4))
    assert info.value.det == 0.0


def test_invert_allocate_examples():
    state = VehicleState(R=rotation_matrix(0.1, -0.1, 0.2), omega_B=[0.3, -0.2, 0.1])
    dm = build_decoupling(state, Gait((-0.1, 0.1, -0.2, 0.1)), P)
    np.testing.assert_allclose(invert_allocate(dm, dm.Ma), 0.0, atol=1e-12)
    for j in range(4):
        U = invert_allocate(dm, dm.Ma + dm.delta[:, j])
        np.testing.assert_allclose(U, np.eye(4)[j], atol=1e-9)


@given(states(), st.lists(st.floats(-100, 100), min_size=4, max_size=4))
def test_allocation_residual(sg, jerk):
    state, gait = sg
    dm = build_decoupling(state, gait, P)
    if abs(dm.det) < 1e-12 or dm.cond > 1e10:
        return
    U = invert_allocate(dm, jerk)
    residual = dm.delta @ U + dm.Ma - np.asarray(jerk)
    assert np.linalg.norm(residual) <= 1e-9 * max(1.0, np.linalg.norm(jerk))


@given(st.floats(-800, 800), st.floats(-50, 50))
def test_signed_square_rate_is_chain_rule(varpi, rate):
    h = 1e-4
    fd = ((varpi + h * rate) * abs(varpi + h * rate) - (varpi - h * rate) * abs(varpi - h * rate)) / (2 * h)
    # the central difference of v|v| is exact away from 0 and off by at most h * rate^2 across it
    assert signed_square_rate(varpi, rate) == pytest.approx(fd, rel=1e-6, abs=h * rate**2 + 1e-6)


def test_threshold_is_strict():
    dm = build_decoupling(VehicleState(), Gait.zero(), P)
    with pytest.raises(SingularDecoupling):
        invert_allocate(dm, np.zeros(4), threshold=abs(dm.det))
    invert_allocate(dm, np.zeros(4), threshold=0.5 * abs(dm.det))


def test_hat_sign_in_drift():
    # a pure yaw rate leaves the body z-axis fixed, so the drift vanishes at the zero gait
    state = VehicleState(omega_B=[0, 0, 2.0])
    assert build_decoupling(state, Gait.zero(), P).Ma[3] == 0.0
    assert np.allclose(hat([0, 0, 2.0]) @ [0, 0, 1], 0)
