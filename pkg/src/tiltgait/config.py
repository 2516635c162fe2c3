"""Plain-text ``key = value`` configuration.

Blank lines and ``#`` comments are ignored. Vector values are comma
separated. Every key has a default, so an empty file is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from tiltgait.controller import Reference
from tiltgait.simulator import SimConfig
from tiltgait.vehicle import Gait


class ConfigError(ValueError):
    pass


# key -> (section, field, arity); arity 0 means scalar
_KEYS = {
    "m": ("params", "m", 0),
    "L": ("params", "L", 0),
    "g": ("params", "g", 0),
    "I_B": ("params", "I_B", 3),
    "K_f": ("params", "K_f", 0),
    "K_m": ("params", "K_m", 0),
    "K_P1": ("gains", "K_P1", 3),
    "K_P2": ("gains", "K_P2", 3),
    "K_P3": ("gains", "K_P3", 3),
    "K_PZ1": ("gains", "K_PZ1", 0),
    "K_PZ2": ("gains", "K_PZ2", 0),
    "K_PZ3": ("gains", "K_PZ3", 0),
    "singular_det": ("thresholds", "singular_det", 0),
    "rotor_eps": ("thresholds", "rotor_eps", 0),
    "settle_fraction": ("thresholds", "settle_fraction", 0),
    "attitude_tol": ("thresholds", "attitude_tol", 0),
    "altitude_tol": ("thresholds", "altitude_tol", 0),
    "blowup": ("thresholds", "blowup", 0),
    "gimbal_limit": ("thresholds", "gimbal_limit", 0),
    "gait": ("sim", "gait", 4),
    "reference": ("sim", "reference", 4),
    "dt": ("sim", "dt", 0),
    "duration": ("sim", "duration", 0),
    "position0": ("sim", "position0", 3),
    "velocity0": ("sim", "velocity0", 3),
    "attitude0": ("sim", "attitude0", 3),
    "omega0": ("sim", "omega0", 3),
    "rotor_speed0": ("sim", "rotor_speed0", 0),
    "rotor_speed_cap": ("sim", "rotor_speed_cap", 0),
    "grid_n": ("run", "grid_n", 0),
    "grid_lo": ("run", "grid_lo", 0),
    "grid_hi": ("run", "grid_hi", 0),
    "explore_step": ("run", "explore_step", 0),
    "survey_pitch": ("run", "survey_pitch", 0),
    "workers": ("run", "workers", 0),
}
CONFIG_KEYS = tuple(_KEYS)


@dataclass(frozen=True)
class Settings:
    sim: SimConfig = field(default_factory=SimConfig)
    grid_n: int = 401
    grid_lo: float = -np.pi
    grid_hi: float = np.pi
    explore_step: float = 0.05
    survey_pitch: float = 0.1
    workers: int = 1

    @property
    def window(self) -> tuple[float, float]:
        return (self.grid_lo, self.grid_hi)


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_text(text, str(path))


def _parse_value(key: str, raw: str):
    _, _, arity = _KEYS[key]
    if key == "rotor_speed_cap" and raw.strip().lower() in ("", "none", "off"):
        return None
    try:
        values = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as numbers") from exc
    if arity == 0:
        if len(values) != 1:
            raise ConfigError(f"{key}: expected one number, got {raw!r}")
        return values[0]
    if key.startswith("K_P") and len(values) == 1:
        values = values * 3
    if len(values) != arity:
        raise ConfigError(f"{key}: expected {arity} comma-separated numbers, got {raw!r}")
    return tuple(values)


def build_settings(mapping: Mapping[str, str], base: Optional[Settings] = None) -> Settings:
    """Apply raw key/value pairs on top of ``base`` (defaults if omitted)."""
    base = base or Settings()
    sections: dict[str, dict] = {"params": {}, "gains": {}, "thresholds": {}, "sim": {}, "run": {}}
    for key, raw in mapping.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        section, name, _ = _KEYS[key]
        sections[section][name] = _parse_value(key, str(raw))
    try:
        sim = base.sim
        params = replace(sim.params, **sections["params"])
        gains = replace(sim.gains, **sections["gains"])
        thresholds = replace(sim.thresholds, **sections["thresholds"])
        simkw = dict(sections["sim"])
        if "gait" in simkw:
            simkw["gait"] = Gait(simkw["gait"])
        if "reference" in simkw:
            simkw["reference"] = Reference(y=simkw["reference"])
        sim = replace(sim, params=params, gains=gains, thresholds=thresholds, **simkw)
        runkw = dict(sections["run"])
        for name in ("grid_n", "workers"):
            if name in runkw:
                if runkw[name] != int(runkw[name]) or runkw[name] < 1:
                    raise ConfigError(f"{name} must be a positive integer")
                runkw[name] = int(runkw[name])
        settings = replace(base, sim=sim, **runkw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if settings.grid_n < 2 or not settings.grid_hi > settings.grid_lo:
        raise ConfigError("grid needs grid_n >= 2 and grid_hi > grid_lo")
    if not settings.explore_step > 0 or not settings.survey_pitch > 0:
        raise ConfigError("explore_step and survey_pitch must be positive")
    return settings


def dump_settings(settings: Settings) -> str:
    """Round-trippable text for ``settings``."""
    sim = settings.sim
    sections = {
        "params": sim.params,
        "gains": sim.gains,
        "thresholds": sim.thresholds,
        "sim": sim,
        "run": settings,
    }
    lines = []
    for key, (section, name, _) in _KEYS.items():
        value = getattr(sections[section], name)
        if isinstance(value, Gait):
            value = value.alpha
        elif isinstance(value, Reference):
            value = value.y
        if value is None:
            text = "none"
        elif isinstance(value, tuple):
            text = ",".join(repr(float(v)) for v in value)
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
