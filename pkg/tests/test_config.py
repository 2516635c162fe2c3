import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiltgait.config import CONFIG_KEYS, ConfigError, Settings, build_settings, dump_settings, load_config, parse_text


def test_empty_config_gives_defaults():
    assert build_settings(parse_text("")) == Settings()


def test_parse_and_build(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# vehicle\n"
        "m = 0.5\n"
        "K_P1 = 6   # scalar broadcasts\n"
        "K_PZ3 = 8\n"
        "gait = -0.1, 0.1, -0.2, 0.1\n"
        "rotor_speed_cap = none\n"
        "workers = 3\n"
    )
    s = build_settings(load_config(path))
    assert s.sim.params.m == 0.5
    assert s.sim.gains.K_P1 == (6.0, 6.0, 6.0)
    assert s.sim.gains.K_PZ3 == 8.0
    assert s.sim.gait.alpha == (-0.1, 0.1, -0.2, 0.1)
    assert s.sim.rotor_speed_cap is None
    assert s.workers == 3


@pytest.mark.parametrize(
    "text",
    ["bogus = 1", "m 0.5", "m = abc", "gait = 1,2", "m = -1", "workers = 1.5", "grid_n = 1", "dt = 0", "explore_step = 0"],
)
def test_bad_config_raises(text):
    with pytest.raises(ConfigError):
        build_settings(parse_text(text))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_dump_round_trip():
    s = build_settings({"K_P2": "12", "reference": "0.1,0,0,1", "rotor_speed_cap": "500", "grid_lo": "-1.5"})
    text = dump_settings(s)
    assert build_settings(parse_text(text)) == s
    assert [line.split(" = ")[0] for line in text.splitlines()] == list(CONFIG_KEYS)


@given(st.floats(1e-4, 1e-2), st.floats(0.5, 20), st.integers(2, 1000))
def test_overrides_round_trip(dt, duration, grid_n):
    s = build_settings({"dt": repr(dt), "duration": repr(duration), "grid_n": str(grid_n)})
    assert build_settings(parse_text(dump_settings(s))) == s
    assert s.sim.dt == dt and s.grid_n == grid_n
    assert s.window == (-np.pi, np.pi)
