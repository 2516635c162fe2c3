import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiltgait import ControlGains, Reference, altitude_command, attitude_command
from tiltgait.controller import output_command

GAINS = ControlGains()
vals = st.floats(-10, 10, allow_nan=False)
vec4 = st.tuples(vals, vals, vals, vals)


def test_attitude_examples():
    ref = Reference()
    np.testing.assert_allclose(attitude_command(ref, [0.1, 0, 0], np.zeros(3), np.zeros(3), GAINS), [-0.1, 0, 0])
    np.testing.assert_allclose(attitude_command(ref, np.zeros(3), [0, 0.2, 0], np.zeros(3), GAINS), [0, -0.2, 0])


def test_altitude_examples():
    ref = Reference()
    assert altitude_command(ref, -1.0, 0.0, 0.0, GAINS) == 10.0
    assert altitude_command(ref, 0.0, 0.0, -9.8, GAINS) == pytest.approx(98.0)


@given(vec4, vec4, vec4, vec4)
def test_zero_error_passes_feedforward(y, dy, ddy, dddy):
    ref = Reference(y=y, dy=dy, ddy=ddy, dddy=dddy)
    np.testing.assert_allclose(output_command(ref, y, dy, ddy, GAINS), dddy)


@given(vec4, vec4, vec4, vec4, vec4, vec4)
def test_command_is_linear_in_errors(y1, y2, dy1, dy2, dd1, dd2):
    ref = Reference()
    a = output_command(ref, y1, dy1, dd1, GAINS)
    b = output_command(ref, y2, dy2, dd2, GAINS)
    both = output_command(ref, np.add(y1, y2), np.add(dy1, dy2), np.add(dd1, dd2), GAINS)
    np.testing.assert_allclose(both, a + b, atol=1e-9)


def test_characteristic_polynomials():
    polys = GAINS.characteristic_polynomials()
    for p in polys[:3]:
        np.testing.assert_array_equal(p, [1, 1, 1, 1])
    np.testing.assert_array_equal(polys[3], [1, 10, 5, 10])


def test_default_attitude_loop_is_marginal():
    # s^3 + s^2 + s + 1 = (s + 1)(s^2 + 1): a pair of poles sits on the imaginary axis
    roots = np.roots(GAINS.characteristic_polynomials()[0])
    assert np.max(roots.real) == pytest.approx(0.0, abs=1e-9)
    assert GAINS.is_hurwitz() == [False, False, False, True]
    alt = np.roots(GAINS.characteristic_polynomials()[3])
    assert np.max(alt.real) == pytest.approx(-0.206, abs=1e-3)


@given(st.floats(0.1, 5))
def test_triple_pole_gains_are_hurwitz(p):
    g = ControlGains(K_P1=3 * p, K_P2=3 * p * p, K_P3=p**3, K_PZ1=3 * p, K_PZ2=3 * p * p, K_PZ3=p**3)
    assert all(g.is_hurwitz())
    for poly in g.characteristic_polynomials():
        np.testing.assert_allclose(np.roots(poly).real, -p, atol=1e-3 * p + 1e-4)


def test_scalar_gains_broadcast_and_validation():
    g = ControlGains(K_P1=2.0)
    assert g.K_P1 == (2.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        ControlGains(K_PZ1=float("nan"))
    with pytest.raises(ValueError):
        Reference(y=(0, 0, 0))
