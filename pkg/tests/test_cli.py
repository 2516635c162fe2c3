import csv
import json

import numpy as np
import pytest

from tiltgait.cli import main
from tiltgait.simulator import TELEMETRY_COLUMNS

HURWITZ = ["--K_P1", "6", "--K_P2", "12", "--K_P3", "8", "--K_PZ1=6", "--K_PZ2=12", "--K_PZ3=8"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_simulate_writes_csv_and_verdict(tmp_path, capsys):
    out = tmp_path / "flight_{alpha1}_{alpha2}_{alpha3}_{alpha4}.csv"
    code = main(["simulate", "--gait=0,0,0,0", "--duration", "1", "--out", str(out), *HURWITZ])
    assert code == 0
    printed = capsys.readouterr().out
    assert "verdict:" in printed
    rows = read_csv(tmp_path / "flight_0.0_0.0_0.0_0.0.csv")
    assert tuple(rows[0]) == TELEMETRY_COLUMNS
    assert len(rows) == 1002


def test_simulate_expect_stable_passes_for_settling_gains(tmp_path, capsys):
    code = main(["simulate", "--gait=-0.1,0.1,-0.2,0.1", "--expect", "stable", "--out", str(tmp_path / "f.csv"), *HURWITZ])
    assert code == 0
    assert "verdict: Stable" in capsys.readouterr().out


def test_simulate_expect_stable_fails_with_exit_1(tmp_path, capsys):
    # default gains leave the attitude loop marginal
    code = main(["simulate", "--gait=-0.1,0.1,-0.2,0.1", "--expect", "stable", "--out", str(tmp_path / "f.csv")])
    assert code == 1
    summary = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert summary["verdict"] == "Unstable"


def test_config_file_and_override_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("duration = 0.5\ngait = 0.1, 0, 0, 0\n")
    out = tmp_path / "f.csv"
    assert main(["simulate", "--config", str(cfg), "--duration", "0.2", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 202
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["gait"] == [0.1, 0.0, 0.0, 0.0]


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--bogus", "1"],
        ["simulate", "--gait=1,2"],
        ["simulate", "stray"],
        ["simulate", "--dt"],
        ["curves", "--restriction", "sideways"],
        ["curves", "--triangle", "0,0,1,1"],
        ["check", "--only", "12"],
        ["simulate", "--config", "/nonexistent.cfg"],
        ["frobnicate"],
        [],
    ],
)
def test_bad_input_exits_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_curves_csv_and_region_check(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["curves", "--restriction=equal", "--alpha1=0.15", "--out", str(out), "--grid_n", "201"]) == 0
    assert "region_clear: True" in capsys.readouterr().out
    rows = read_csv(out)
    assert rows[0] == ["curve_id", "alpha2", "alpha4"]
    ids = {int(r[0]) for r in rows[1:]}
    assert ids == set(range(len(ids))) and len(ids) >= 1
    pts = np.array([[float(r[1]), float(r[2])] for r in rows[1:]])
    assert np.all(np.abs(pts) <= np.pi + 1e-12)
    # a triangle reaching past the curves is not clear
    main(["curves", "--alpha1=0.15", "--out", str(out), "--grid_n", "201", "--triangle=-3,3,3,-3,3,3"])
    assert "region_clear: False" in capsys.readouterr().out


def test_surface_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["surface", "--restriction", "negative", "--alpha1", "-0.7", "--grid_n", "11", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["alpha2", "alpha4", "det"]
    assert len(rows) == 1 + 121


def test_surface_to_stdout(capsys):
    assert main(["surface", "--grid_n", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "alpha2,alpha4,det"


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    argv = ["explore", "--direction", "diagonal", "--explore_step", "0.5", "--duration", "0.5", *HURWITZ]
    assert main([*argv, "--out", str(a)]) == 0
    assert main([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_explore_ndjson(tmp_path):
    out = tmp_path / "e.ndjson"
    assert main(["explore", "--direction", "anti-diag-positive", "--explore_step", "0.5", "--out", str(out), *HURWITZ]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records[-1]["type"] == "summary"
    assert records[-1]["direction"] == "anti-diag-positive"
    assert all(r["type"] == "sample" for r in records[:-1])


def test_survey_ndjson(tmp_path):
    out = tmp_path / "s.ndjson"
    code = main(["survey", "--restriction", "half", "--alpha1", "0.2", "--survey_pitch", "0.75", "--out", str(out), *HURWITZ])
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    summary = records[-1]
    assert summary["n_samples"] == len(records) - 1
    assert summary["n_unstable"] >= 1
    assert summary["alpha3"] == pytest.approx(0.4)


def test_check_subset(capsys):
    assert main(["check", "--only", "1,6,9"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 3
    assert "3/3 criteria passed" in out
