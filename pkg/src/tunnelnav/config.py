"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    # tunnel
    width: float = 6.0
    height: float = 4.0
    length: float = 300.0
    arc_radius: float = 40.0
    arc_angle_deg: float = 45.0
    roughness: float = 0.1
    # camera and light
    hfov_deg: float = 80.0
    light_intensity: float = 1.0
    ambient: float = 0.0
    falloff: float = 1.55
    noise_sigma: float = 2.0
    # labeling rig
    n_per_class: int = 1800
    camera_offset_deg: float = 30.0
    span: float = 80.0
    lateral_jitter: float = 0.3
    vertical_jitter: float = 0.05
    yaw_jitter_deg: float = 3.0
    illumination_levels: tuple = (0.25, 0.5, 1.0, 2.0)
    # training
    epochs: int = 25
    steps_per_epoch: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    train_ratio: float = 0.9
    # flight
    z_d: float = 1.0
    v_dx: float = 0.1
    v_dy: float = 0.0
    yaw_rate: float = 0.2
    velocities: tuple = (0.1, 0.5, 1.0)
    runs: int = 1
    dt: float = 0.02
    control_rate: float = 5.0
    max_time: float = 0.0
    tau_v: float = 0.3
    tau_z: float = 0.5
    radius: float = 0.35
    smoothing_window: int = 1
    use_lidar: bool = False
    # paths
    tunnel: str = ""
    dataset: str = ""
    model: str = ""

    def with_values(self, values: dict) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        parsed = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            parsed[key] = _coerce(key, known[key].type, raw)
        return replace(self, **parsed)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _coerce(key, typ, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if typ in ("int", int):
            return int(text)
        if typ in ("float", float):
            v = float(text)
            if not math.isfinite(v):
                raise ValueError
            return v
        if typ in ("bool", bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if typ in ("tuple", tuple):
            return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}") from None
    return text


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        values[key] = value
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        cfg = cfg.with_values(parse_config_text(p.read_text()))
    if overrides:
        cfg = cfg.with_values(overrides)
    return cfg
