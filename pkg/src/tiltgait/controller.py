"""Third-order PD law on the linearized attitude-altitude outputs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _vec(values, n: int) -> tuple[float, ...]:
    out = tuple(float(v) for v in np.broadcast_to(np.asarray(values, dtype=float), (n,)))
    if not all(np.isfinite(out)):
        raise ValueError(f"non-finite entries: {out}")
    return out


@dataclass(frozen=True)
class ControlGains:
    """Diagonals of K_P1..K_P3 (attitude) and scalars K_PZ1..K_PZ3 (altitude).

    K_P1 / K_PZ1 weight the second-derivative error, K_P2 / K_PZ2 the rate
    error, K_P3 / K_PZ3 the output error.
    """

    K_P1: tuple[float, float, float] = (1.0, 1.0, 1.0)
    K_P2: tuple[float, float, float] = (1.0, 1.0, 1.0)
    K_P3: tuple[float, float, float] = (1.0, 1.0, 1.0)
    K_PZ1: float = 10.0
    K_PZ2: float = 5.0
    K_PZ3: float = 10.0

    def __post_init__(self):
        for name in ("K_P1", "K_P2", "K_P3"):
            object.__setattr__(self, name, _vec(getattr(self, name), 3))
        for name in ("K_PZ1", "K_PZ2", "K_PZ3"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    def characteristic_polynomials(self) -> list[np.ndarray]:
        """Closed-loop ``s^3 + k1 s^2 + k2 s + k3`` per channel (phi, theta, psi, z)."""
        polys = [np.array([1.0, self.K_P1[i], self.K_P2[i], self.K_P3[i]]) for i in range(3)]
        polys.append(np.array([1.0, self.K_PZ1, self.K_PZ2, self.K_PZ3]))
        return polys

    def is_hurwitz(self) -> list[bool]:
        # Routh-Hurwitz for a monic cubic: all k > 0 and k1 k2 > k3.
        return [bool(k1 > 0 and k3 > 0 and k1 * k2 > k3) for _, k1, k2, k3 in self.characteristic_polynomials()]


@dataclass(frozen=True)
class Reference:
    """Output reference and its first three time derivatives."""

    y: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    dy: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    ddy: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    dddy: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))

    def __post_init__(self):
        for name in ("y", "dy", "ddy", "dddy"):
            object.__setattr__(self, name, _vec(getattr(self, name), 4))


def attitude_command(ref: Reference, y, dy, ddy, gains: ControlGains) -> np.ndarray:
    """Desired third derivative of (phi, theta, psi)."""
    y, dy, ddy = (np.asarray(v, dtype=float)[:3] for v in (y, dy, ddy))
    r = slice(0, 3)
    return (
        np.asarray(ref.dddy[r])
        + np.asarray(gains.K_P1) * (np.asarray(ref.ddy[r]) - ddy)
        + np.asarray(gains.K_P2) * (np.asarray(ref.dy[r]) - dy)
        + np.asarray(gains.K_P3) * (np.asarray(ref.y[r]) - y)
    )


def altitude_command(ref: Reference, z: float, dz: float, ddz: float, gains: ControlGains) -> float:
    return float(
        ref.dddy[3]
        + gains.K_PZ1 * (ref.ddy[3] - ddz)
        + gains.K_PZ2 * (ref.dy[3] - dz)
        + gains.K_PZ3 * (ref.y[3] - z)
    )


def output_command(ref: Reference, y, dy, ddy, gains: ControlGains) -> np.ndarray:
    """Stacked 4-vector of desired output jerks."""
    jerk = np.empty(4)
    jerk[:3] = attitude_command(ref, y, dy, ddy, gains)
    jerk[3] = altitude_command(ref, y[3], dy[3], ddy[3], gains)
    return jerk
