from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import HURWITZ_GAINS
from tiltgait import SimConfig, Verdict
from tiltgait.explorer import (
    GRID_SEMANTICS,
    Direction,
    ExplorationDirection,
    classify_gaits,
    explore_direction,
    fit_triangle,
    lattice,
    survey_region,
)
from tiltgait.invertibility import ADMISSIBLE_REGION, INTEREST_REGION, GaitRestriction, Restriction, TriangleRegion, in_triangle

EQUAL0 = GaitRestriction(Restriction.EQUAL, 0.0)
SETTLING = SimConfig(gains=HURWITZ_GAINS)


def test_direction_samples():
    pos = ExplorationDirection(Direction.ANTI_DIAG_POSITIVE, 0.5).samples()
    assert pos == [(0.0, 0.0), (0.5, -0.5), (1.0, -1.0), (1.5, -1.5)]
    neg = ExplorationDirection("anti-diag-negative", 0.5).samples()
    assert neg[-1] == (-1.5, 1.5)
    diag = ExplorationDirection(Direction.DIAGONAL).samples()
    assert len(diag) == 21 and diag[-1] == (1.0, 1.0)
    with pytest.raises(ValueError):
        ExplorationDirection(Direction.DIAGONAL, 0.0)


@given(st.sampled_from(list(Direction)), st.floats(0.01, 0.5))
def test_direction_samples_stay_in_region(kind, step):
    samples = ExplorationDirection(kind, step).samples()
    assert samples[0] == (0.0, 0.0)
    assert all(in_triangle(p, INTEREST_REGION, tol=1e-9) for p in samples)


def test_lattice_counts():
    assert len(lattice(0.25)) == 57
    assert len(lattice(0.1)) == 321
    pts = lattice(0.1)
    assert np.all(in_triangle(pts, INTEREST_REGION, tol=1e-9))


def test_fit_triangle_examples():
    pts = lattice(0.25)
    assert fit_triangle(pts, np.ones(len(pts), bool)) == (1.5, 1.0)
    assert fit_triangle(pts, np.zeros(len(pts), bool)) is None
    assert fit_triangle(np.zeros((1, 2)), np.array([True])) == (0.0, 0.0)


@given(st.lists(st.booleans(), min_size=57, max_size=57))
def test_fitted_hull_contains_only_stable(flags):
    pts = lattice(0.25)
    stable = np.array(flags)
    stable[np.all(pts == 0, axis=1)] = True
    a, b = fit_triangle(pts, stable)
    if a > 0 and b > 0:
        inside = in_triangle(pts, TriangleRegion((-a, a), (a, -a), (b, b)), tol=1e-9)
        assert np.all(stable[inside])


def test_single_sample_survey_at_origin():
    report = survey_region(EQUAL0, np.zeros((1, 2)), SETTLING)
    assert report.samples[0].stable
    assert report.hull == (0.0, 0.0)
    assert report.hull_vertices() == [(-0.0, 0.0), (0.0, -0.0), (0.0, 0.0)]


def test_survey_rejects_samples_outside_region():
    with pytest.raises(ValueError):
        survey_region(EQUAL0, np.array([[1.6, 0.0]]), SETTLING)


def test_exception_case_has_unstable_samples():
    # level hover with (alpha1, alpha3) = (0.2, 0.4) needs rotors 2 and 4 reversed
    report = survey_region(GaitRestriction(Restriction.HALF, 0.2), np.array([[0.0, 0.0], [0.5, -0.5]]), SETTLING)
    assert len(report.unstable) >= 1
    assert all(s.classification.verdict is Verdict.SINGULAR_ABORT for s in report.unstable)


def test_explore_stops_at_first_unstable_sample():
    result = explore_direction(EQUAL0, ExplorationDirection(Direction.ANTI_DIAG_POSITIVE, 0.25), SETTLING)
    flags = [s.stable for s in result.samples]
    assert flags[0]  # the zero gait is the conventional quadrotor
    if False in flags:
        assert flags.index(False) == len(flags) - 1
    assert all(abs(s.alpha2) <= abs(result.alpha2M) for s in result.samples if s.stable)
    assert result.alpha2M >= 1.25 - 1e-9
    records = result.records()
    assert records[-1]["type"] == "summary"
    assert records[-1]["semantics"] == GRID_SEMANTICS
    assert records[-1]["critical_gait"] == [0.0, result.alpha2M, 0.0, -result.alpha2M]


def test_explore_diagonal_reaches_vertex():
    result = explore_direction(EQUAL0, ExplorationDirection(Direction.DIAGONAL, 0.25), SETTLING)
    assert result.alpha2M >= 1.0 - 0.25


def test_explore_unstable_origin_gives_zero():
    cfg = replace(SETTLING, gains=replace(HURWITZ_GAINS, K_PZ3=-8.0))
    result = explore_direction(EQUAL0, ExplorationDirection(Direction.DIAGONAL, 0.5), cfg)
    assert result.alpha2M == 0.0
    assert len(result.samples) == 1


def test_classify_gaits_pool_preserves_order():
    configs = [replace(SETTLING, duration=0.5, gait=EQUAL0.gait(a, -a)) for a in (0.0, 0.3, 0.6)]
    serial = classify_gaits(configs, workers=1)
    pooled = classify_gaits(configs, workers=2)
    assert serial == pooled


def test_survey_records_are_ordered():
    grid = np.array([[0.0, 0.0], [0.25, -0.25], [-0.25, 0.25]])
    report = survey_region(EQUAL0, grid, replace(SETTLING, duration=0.5))
    rows = report.records()
    assert [r["index"] for r in rows[:-1]] == [0, 1, 2]
    assert [(r["alpha2"], r["alpha4"]) for r in rows[:-1]] == [tuple(p) for p in grid]
    assert rows[-1]["n_samples"] == 3
    assert report.all_stable_within(ADMISSIBLE_REGION) == (len(report.unstable) == 0)
