import numpy as np
import pytest
from hypothesis import settings

from tiltgait import ControlGains, Gait, VehicleParams

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

# Closed-loop poles at (s + 2)^3 on every channel; used wherever a flight
# needs to settle (the default gains leave the attitude loop marginal).
HURWITZ_GAINS = ControlGains(K_P1=6.0, K_P2=12.0, K_P3=8.0, K_PZ1=6.0, K_PZ2=12.0, K_PZ3=8.0)


@pytest.fixture
def params():
    return VehicleParams()


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def gait1():
    return Gait((-0.1, 0.1, -0.2, 0.1))


@pytest.fixture
def gait2():
    return Gait((-0.15, -0.1, 0.3, -0.1))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number].line().splitlines()[0])
