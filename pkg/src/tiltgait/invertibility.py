"""Where the decoupling matrix loses rank, as a function of the gait.

The ground truth is the numerically assembled 4x4 matrix whose rows are the
body torque map and the inertial vertical thrust direction; its determinant
differs from the decoupling matrix's only by positive row and column scalings.
The printed level-attitude polynomial (rounded to four significant figures)
is kept as a cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from tiltgait.vehicle import Gait, VehicleParams

DEFAULT_PARAMS = VehicleParams()


class Restriction(str, enum.Enum):
    EQUAL = "equal"
    HALF = "half"
    NEGATIVE = "negative"
    NEGATIVE_HALF = "negative-half"

    @property
    def ratio(self) -> float:
        """alpha3 / alpha1."""
        return {"equal": 1.0, "half": 2.0, "negative": -1.0, "negative-half": -2.0}[self.value]


@dataclass(frozen=True)
class GaitRestriction:
    kind: Restriction
    value: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Restriction(self.kind))
        object.__setattr__(self, "value", float(self.value))

    @property
    def alpha1(self) -> float:
        return self.value

    @property
    def alpha3(self) -> float:
        return self.kind.ratio * self.value

    def gait(self, alpha2: float, alpha4: float) -> Gait:
        return Gait((self.alpha1, alpha2, self.alpha3, alpha4))


# Alpha values per restriction used to draw the zero curves.
RESTRICTION_CASES = {
    Restriction.EQUAL: (-0.15, -0.075, 0.0, 0.075, 0.15),
    Restriction.HALF: (-0.2, -0.1, 0.0, 0.1, 0.2),
    Restriction.NEGATIVE: (-1.4, -0.7, 0.0, 0.7, 1.4),
    Restriction.NEGATIVE_HALF: (-0.3, -0.15, 0.0, 0.15, 0.3),
}


def invertibility_matrix(alpha, phi=0.0, theta=0.0, params: VehicleParams = DEFAULT_PARAMS) -> np.ndarray:
    """Stacked matrices, shape ``broadcast(alpha[i], phi, theta) + (4, 4)``.

    ``alpha`` is a length-4 sequence whose entries may be arrays.
    """
    a = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in alpha], np.asarray(phi, float), np.asarray(theta, float))
    s1, s2, s3, s4 = (np.sin(x) for x in a[:4])
    c1, c2, c3, c4 = (np.cos(x) for x in a[:4])
    sph, cph, sth, cth = np.sin(a[4]), np.cos(a[4]), np.sin(a[5]), np.cos(a[5])
    lk, km = params.L * params.K_f, params.K_m
    zero = np.zeros_like(s1)
    rows = [
        [zero, lk * c2 - km * s2, zero, -lk * c4 + km * s4],
        [lk * c1 + km * s1, zero, -lk * c3 - km * s3, zero],
        [lk * s1 - km * c1, -lk * s2 - km * c2, lk * s3 - km * c3, -lk * s4 - km * c4],
        [
            cth * sph * s1 - cth * cph * c1,
            -sth * s2 + cth * cph * c2,
            -cth * sph * s3 - cth * cph * c3,
            sth * s4 + cth * cph * c4,
        ],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def determinant_general(alpha, phi=0.0, theta=0.0, params: VehicleParams = DEFAULT_PARAMS):
    """Invertibility determinant for a gait (or arrays of tilt angles)."""
    if isinstance(alpha, Gait):
        alpha = alpha.alpha
    det = np.linalg.det(invertibility_matrix(alpha, phi, theta, params))
    return float(det) if np.ndim(det) == 0 else det


def paper_polynomial_level(alpha):
    """The printed level-attitude condition, term by term as published."""
    if isinstance(alpha, Gait):
        alpha = alpha.alpha
    s1, s2, s3, s4 = (np.sin(np.asarray(x, dtype=float)) for x in alpha)
    c1, c2, c3, c4 = (np.cos(np.asarray(x, dtype=float)) for x in alpha)
    value = (
        4.000 * c1 * c2 * c3 * c4
        + 5.592 * (c1 * c2 * c3 * s4 - c1 * c2 * s3 * c4 + c1 * s2 * c3 * c4 - s1 * c2 * c3 * c4)
        + 0.9716 * (c1 * c2 * s3 * s4 + c1 * s2 * s3 * c4 + s1 * c2 * c3 * s4 + s1 * s2 * c3 * c4)
        + 2.000 * (-c1 * s2 * c3 * s4 - s1 * c2 * s3 * c4)
        + 0.1687 * (-c1 * s2 * s3 * s4 + s1 * c2 * s3 * s4 - s1 * s2 * c3 * s4 + s1 * s2 * s3 * c4)
    )
    return float(value) if np.ndim(value) == 0 else value


def decoupling_scale(params: VehicleParams = DEFAULT_PARAMS) -> float:
    """Constant k with det(decoupling) = k * determinant_general * prod(2|varpi|)
    at level attitude."""
    return params.K_f / (params.m * float(np.prod(params.I_B)))


def restricted_alpha(restriction: GaitRestriction, alpha2, alpha4):
    return (restriction.alpha1, alpha2, restriction.alpha3, alpha4)


# -- surfaces and zero curves -------------------------------------------------


@dataclass
class DeterminantSurface:
    restriction: GaitRestriction
    axis: np.ndarray
    values: np.ndarray  # values[i, j] at (alpha2=axis[i], alpha4=axis[j])


def determinant_surface(
    restriction: GaitRestriction,
    window: tuple[float, float] = (-np.pi, np.pi),
    n: int = 401,
    params: VehicleParams = DEFAULT_PARAMS,
) -> DeterminantSurface:
    axis = np.linspace(window[0], window[1], n)
    A2, A4 = np.meshgrid(axis, axis, indexing="ij")
    values = determinant_general(restricted_alpha(restriction, A2, A4), 0.0, 0.0, params)
    return DeterminantSurface(restriction, axis, values)


@dataclass
class ZeroCurveSet:
    restriction: GaitRestriction
    polylines: list[np.ndarray]  # each (k, 2): columns alpha2, alpha4
    n: int
    window: tuple[float, float]
    tolerance: float

    def __len__(self) -> int:
        return len(self.polylines)

    @property
    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.empty((0, 2))
        return np.vstack(self.polylines)


def _bisect(f, lo: np.ndarray, hi: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Vectorized bisection; each [lo, hi] must bracket a sign change."""
    flo = f(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        left = np.sign(fmid) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def zero_curves(
    restriction: GaitRestriction,
    window: tuple[float, float] = (-np.pi, np.pi),
    n: int = 401,
    params: VehicleParams = DEFAULT_PARAMS,
) -> ZeroCurveSet:
    """Zero set of the level-attitude determinant in the (alpha2, alpha4) plane.

    Marching squares locates crossings on grid edges; each vertex is then
    refined by bisection along its edge.
    """
    surface = determinant_surface(restriction, window, n, params)
    axis, Z = surface.axis, surface.values
    h = axis[1] - axis[0]
    scale = float(np.abs(determinant_general((0.0, 0.0, 0.0, 0.0), 0.0, 0.0, params)))

    polylines = []
    for contour in measure.find_contours(Z, 0.0):
        rows, cols = contour[:, 0], contour[:, 1]
        on_row = np.abs(rows - np.round(rows)) < 1e-9
        a2 = axis[0] + rows * h
        a4 = axis[0] + cols * h
        # on a row edge alpha2 is exact and alpha4 is bracketed by the columns
        i = np.clip(np.floor(np.where(on_row, cols, rows)).astype(int), 0, n - 2)
        lo, hi = axis[i], axis[i + 1]

        def f(x, on_row=on_row, a2=a2, a4=a4):
            return determinant_general(
                restricted_alpha(restriction, np.where(on_row, a2, x), np.where(on_row, x, a4)), 0.0, 0.0, params
            )

        root = _bisect(f, lo, hi)
        a2 = np.where(on_row, a2, root)
        a4 = np.where(on_row, root, a4)
        polylines.append(np.column_stack([a2, a4]))
    return ZeroCurveSet(restriction, polylines, n, window, 1e-3 * scale)


# -- region of interest --------------------------------------------------------


@dataclass(frozen=True)
class TriangleRegion:
    U: tuple[float, float] = (-1.5, 1.5)
    V: tuple[float, float] = (1.5, -1.5)
    M: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError(f"degenerate triangle: {self}")

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.U, self.V, self.M], dtype=float)

    @property
    def area(self) -> float:
        (x1, y1), (x2, y2), (x3, y3) = self.U, self.V, self.M
        return 0.5 * abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))


INTEREST_REGION = TriangleRegion()
ADMISSIBLE_REGION = TriangleRegion((-1.3, 1.3), (1.3, -1.3), (1.0, 1.0))


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def in_triangle(point, region: TriangleRegion = INTEREST_REGION, tol: float = 1e-12):
    """Closed-triangle membership; accepts one point or an (n, 2) array."""
    p = np.asarray(point, dtype=float)
    U, V, M = (np.broadcast_to(v, p.shape) for v in region.vertices)
    d = np.stack([_cross(U, V, p), _cross(V, M, p), _cross(M, U, p)], axis=-1)
    inside = ~(np.any(d < -tol, axis=-1) & np.any(d > tol, axis=-1))
    return bool(inside) if inside.ndim == 0 else inside


def _segments_intersect(p1, p2, q1, q2, tol=1e-12) -> np.ndarray:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_segment(a, b, c, d):
        # c collinear with a-b and inside its bounding box
        return (np.abs(d) <= tol) & (np.minimum(a[..., 0], b[..., 0]) - tol <= c[..., 0]) & (
            c[..., 0] <= np.maximum(a[..., 0], b[..., 0]) + tol
        ) & (np.minimum(a[..., 1], b[..., 1]) - tol <= c[..., 1]) & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]) + tol)

    return proper | on_segment(q1, q2, p1, d1) | on_segment(q1, q2, p2, d2) | on_segment(p1, p2, q1, d3) | on_segment(p1, p2, q2, d4)


def region_clear_of_curves(region: TriangleRegion, curves: ZeroCurveSet) -> bool:
    """True iff no curve vertex or segment touches the closed triangle."""
    verts = region.vertices
    for line in curves.polylines:
        if np.any(in_triangle(line, region)):
            return False
        if len(line) < 2:
            continue
        a, b = line[:-1], line[1:]
        for k in range(3):
            q1 = np.broadcast_to(verts[k], a.shape)
            q2 = np.broadcast_to(verts[(k + 1) % 3], a.shape)
            if np.any(_segments_intersect(a, b, q1, q2)):
                return False
    return True


# -- cross-checks against the printed polynomial -----------------------------


@dataclass
class ProportionalityReport:
    """Fitted ratio determinant / printed polynomial over random level gaits."""

    ratio: float
    max_relative_residual: float
    n_used: int
    constant: bool
    tolerance: float

    def lines(self) -> list[str]:
        status = "constant" if self.constant else "NOT constant (rounded printed coefficients)"
        return [
            f"ratio det/poly = {self.ratio:.6e} over {self.n_used} gaits",
            f"max relative residual = {self.max_relative_residual:.3e} (tol {self.tolerance:.0e}): {status}",
        ]


def proportionality_report(
    n: int = 1000, seed: int = 0, tolerance: float = 1e-6, params: VehicleParams = DEFAULT_PARAMS
) -> ProportionalityReport:
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(-np.pi, np.pi, size=(4, n))
    det = determinant_general(tuple(alpha), 0.0, 0.0, params)
    poly = paper_polynomial_level(tuple(alpha))
    use = np.abs(poly) > 1e-3
    ratios = det[use] / poly[use]
    ratio = float(np.median(ratios))
    residual = float(np.max(np.abs(ratios / ratio - 1.0))) if use.any() else 0.0
    return ProportionalityReport(ratio, residual, int(use.sum()), residual <= tolerance, tolerance)


@dataclass
class ZeroSetAgreement:
    n_segments: int
    tolerance: float
    n_roots_det: int
    n_roots_poly: int
    max_offset: float
    unmatched: list[tuple[int, float]] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        return not self.unmatched and self.max_offset <= self.tolerance


def _roots_along(f, ts: np.ndarray) -> np.ndarray:
    v = f(ts)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) <= 0)[0]
    if not len(idx):
        return np.empty(0)
    roots = _bisect(f, ts[idx], ts[idx + 1])
    # an exact grid zero shows up on both adjacent intervals
    return np.unique(np.round(roots, 12))


def zero_set_agreement(
    n_segments: int = 100,
    seed: int = 0,
    tolerance: float = 1e-3,
    samples: int = 4001,
    params: VehicleParams = DEFAULT_PARAMS,
) -> ZeroSetAgreement:
    """Compare sign changes of the determinant and the printed polynomial along
    random (alpha2, alpha4) segments with random fixed (alpha1, alpha3).

    Offsets are in the segment parameter t in [0, 1].
    """
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, 1.0, samples)
    n_det = n_poly = 0
    worst = 0.0
    unmatched = []
    for k in range(n_segments):
        a1, a3 = rng.uniform(-np.pi, np.pi, size=2)
        start, end = rng.uniform(-np.pi, np.pi, size=(2, 2))

        def alpha(t):
            p = start[:, None] + (end - start)[:, None] * np.atleast_1d(t)
            return (a1, p[0], a3, p[1])

        r_det = _roots_along(lambda t: determinant_general(alpha(t), 0.0, 0.0, params), ts)
        r_poly = _roots_along(lambda t: paper_polynomial_level(alpha(t)), ts)
        n_det += len(r_det)
        n_poly += len(r_poly)
        for mine, other in ((r_det, r_poly), (r_poly, r_det)):
            for r in mine:
                gap = float(np.min(np.abs(other - r))) if len(other) else np.inf
                if gap > tolerance:
                    unmatched.append((k, float(r)))
                else:
                    worst = max(worst, gap)
    return ZeroSetAgreement(n_segments, tolerance, n_det, n_poly, worst, unmatched)
