"""Batch gait exploration: critical gaits along rays and admissible regions.

Each sample is an independent closed-loop flight. Samples run in a process
pool when ``workers > 1``; results are always ordered by sample index.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from tiltgait.invertibility import INTEREST_REGION, GaitRestriction, TriangleRegion, in_triangle
from tiltgait.simulator import GaitClassification, SimConfig, Verdict, run

GRID_SEMANTICS = "all sampled gaits with |alpha2| <= |alpha2M| on the ray are Stable"


class Direction(str, enum.Enum):
    ANTI_DIAG_NEGATIVE = "anti-diag-negative"  # alpha4 = -alpha2, alpha2 in [-3/2, 0]
    ANTI_DIAG_POSITIVE = "anti-diag-positive"  # alpha4 = -alpha2, alpha2 in [0, 3/2]
    DIAGONAL = "diagonal"  # alpha4 = alpha2, alpha2 in [0, 1]

    @property
    def end(self) -> float:
        return {"anti-diag-negative": -1.5, "anti-diag-positive": 1.5, "diagonal": 1.0}[self.value]

    def alpha4(self, alpha2: float) -> float:
        return alpha2 if self is Direction.DIAGONAL else -alpha2


@dataclass(frozen=True)
class ExplorationDirection:
    kind: Direction
    step: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kind", Direction(self.kind))
        if not self.step > 0:
            raise ValueError("exploration step must be positive")

    def samples(self) -> list[tuple[float, float]]:
        n = int(np.floor(abs(self.kind.end) / self.step + 1e-9))
        sign = np.sign(self.kind.end)
        out = []
        for k in range(n + 1):
            a2 = float(np.round(sign * k * self.step, 12)) + 0.0
            out.append((a2, float(self.kind.alpha4(a2)) + 0.0))
        return out


@dataclass(frozen=True)
class Sample:
    alpha2: float
    alpha4: float
    classification: GaitClassification

    @property
    def stable(self) -> bool:
        return self.classification.verdict is Verdict.STABLE

    def record(self) -> dict:
        return {"alpha2": self.alpha2, "alpha4": self.alpha4, **self.classification.as_dict()}


@dataclass
class CriticalGaitResult:
    restriction: GaitRestriction
    direction: ExplorationDirection
    alpha2M: float
    samples: list[Sample]

    @property
    def critical_gait(self) -> tuple[float, float, float, float]:
        r = self.restriction
        return (r.alpha1, self.alpha2M, r.alpha3, self.direction.kind.alpha4(self.alpha2M))

    def records(self) -> list[dict]:
        head = {
            "restriction": self.restriction.kind.value,
            "alpha1": self.restriction.alpha1,
            "alpha3": self.restriction.alpha3,
            "direction": self.direction.kind.value,
        }
        rows = [{"type": "sample", "index": i, **head, **s.record()} for i, s in enumerate(self.samples)]
        rows.append(
            {
                "type": "summary",
                **head,
                "step": self.direction.step,
                "alpha2M": self.alpha2M,
                "critical_gait": list(self.critical_gait),
                "semantics": GRID_SEMANTICS,
            }
        )
        return rows


@dataclass
class AdmissibleRegionReport:
    restriction: GaitRestriction
    samples: list[Sample]
    hull: Optional[tuple[float, float]]  # (a, b): (-a, a), (a, -a), (b, b)

    @property
    def unstable(self) -> list[Sample]:
        return [s for s in self.samples if not s.stable]

    def all_stable_within(self, region: TriangleRegion) -> bool:
        inside = [s for s in self.samples if in_triangle((s.alpha2, s.alpha4), region)]
        return all(s.stable for s in inside)

    def hull_vertices(self) -> Optional[list[tuple[float, float]]]:
        if self.hull is None:
            return None
        a, b = self.hull
        return [(-a, a), (a, -a), (b, b)]

    def records(self) -> list[dict]:
        head = {
            "restriction": self.restriction.kind.value,
            "alpha1": self.restriction.alpha1,
            "alpha3": self.restriction.alpha3,
        }
        rows = [{"type": "sample", "index": i, **head, **s.record()} for i, s in enumerate(self.samples)]
        rows.append(
            {
                "type": "summary",
                **head,
                "n_samples": len(self.samples),
                "n_unstable": len(self.unstable),
                "hull": self.hull_vertices(),
            }
        )
        return rows


def _classify(config: SimConfig) -> GaitClassification:
    return run(config)[1]


def classify_gaits(configs: Sequence[SimConfig], workers: int = 1) -> list[GaitClassification]:
    if workers <= 1 or len(configs) <= 1:
        return [_classify(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_classify, configs))


def _config_for(restriction: GaitRestriction, alpha2: float, alpha4: float, base: SimConfig) -> SimConfig:
    return replace(base, gait=restriction.gait(alpha2, alpha4))


def explore_direction(
    restriction: GaitRestriction,
    direction: ExplorationDirection,
    sim_config: SimConfig = SimConfig(),
    workers: int = 1,
    region: TriangleRegion = INTEREST_REGION,
) -> CriticalGaitResult:
    """March outward from alpha2 = 0 until the first non-Stable sample."""
    points = [p for p in direction.samples() if in_triangle(p, region)]
    batch = max(1, workers)
    samples: list[Sample] = []
    for start in range(0, len(points), batch):
        chunk = points[start : start + batch]
        results = classify_gaits([_config_for(restriction, a2, a4, sim_config) for a2, a4 in chunk], workers)
        stop = False
        for (a2, a4), c in zip(chunk, results):
            samples.append(Sample(a2, a4, c))
            if c.verdict is not Verdict.STABLE:
                stop = True
                break
        if stop:
            break
    stable_prefix = [s for s in samples if s.stable]
    alpha2M = stable_prefix[-1].alpha2 if stable_prefix else 0.0
    return CriticalGaitResult(restriction, direction, alpha2M, samples)


def lattice(pitch: float, region: TriangleRegion = INTEREST_REGION) -> np.ndarray:
    """Square lattice points at ``pitch`` inside the closed triangle."""
    verts = region.vertices
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    xs = np.arange(np.ceil(lo[0] / pitch - 1e-9), np.floor(hi[0] / pitch + 1e-9) + 1) * pitch
    ys = np.arange(np.ceil(lo[1] / pitch - 1e-9), np.floor(hi[1] / pitch + 1e-9) + 1) * pitch
    X, Y = np.meshgrid(np.round(xs, 12), np.round(ys, 12), indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()]) + 0.0
    return pts[in_triangle(pts, region, tol=1e-9)]


def _in_family(points: np.ndarray, a: float, b: float, tol: float = 1e-9) -> np.ndarray:
    # triangle (-a, a), (a, -a), (b, b) in diagonal coordinates
    s = 0.5 * (points[:, 0] + points[:, 1])
    d = 0.5 * np.abs(points[:, 0] - points[:, 1])
    if b <= tol:
        return (np.abs(s) <= tol) & (d <= a + tol)
    return (s >= -tol) & (s <= b + tol) & (d <= a * (1.0 - s / b) + tol)


def fit_triangle(points: np.ndarray, stable: np.ndarray) -> Optional[tuple[float, float]]:
    """Largest triangle (-a, a), (a, -a), (b, b) covering only Stable samples.

    Candidate a and b come from the sample coordinates; None when the origin
    is absent or not Stable.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    stable = np.asarray(stable, dtype=bool)
    origin = np.all(np.abs(points) < 1e-9, axis=1)
    if not np.any(origin & stable):
        return None
    d = np.round(0.5 * np.abs(points[:, 0] - points[:, 1]), 9)
    s = np.round(0.5 * (points[:, 0] + points[:, 1]), 9)
    a_vals = np.unique(np.concatenate([[0.0], d]))
    b_vals = np.unique(np.concatenate([[0.0], s[s >= 0]]))
    best, best_key = (0.0, 0.0), (0.0, 0.0, 0.0)
    for a in a_vals:
        for b in b_vals:
            inside = _in_family(points, a, b)
            if np.all(stable[inside]):
                key = (2.0 * a * b, a, b)
                if key > best_key:
                    best, best_key = (float(a), float(b)), key
    return best


def survey_region(
    restriction: GaitRestriction,
    sample_grid: Optional[np.ndarray] = None,
    sim_config: SimConfig = SimConfig(),
    workers: int = 1,
    pitch: float = 0.1,
    region: TriangleRegion = INTEREST_REGION,
) -> AdmissibleRegionReport:
    if sample_grid is None:
        sample_grid = lattice(pitch, region)
    points = np.asarray(sample_grid, dtype=float).reshape(-1, 2)
    outside = ~np.asarray(in_triangle(points, region, tol=1e-9))
    if np.any(outside):
        raise ValueError(f"survey samples outside the region of interest: {points[outside].tolist()}")
    configs = [_config_for(restriction, a2, a4, sim_config) for a2, a4 in points]
    results = classify_gaits(configs, workers)
    samples = [Sample(float(a2), float(a4), c) for (a2, a4), c in zip(points, results)]
    hull = fit_triangle(points, np.array([s.stable for s in samples]))
    return AdmissibleRegionReport(restriction, samples, hull)
