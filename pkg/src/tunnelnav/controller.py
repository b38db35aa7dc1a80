"""Turn classifier output into floating-object velocity commands.

Yaw follows the z-up convention: a positive yaw rate turns the vehicle
counter-clockwise (to the left) seen from above.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .labels import ClassLabel


@dataclass(frozen=True)
class SetpointConfig:
    """Altitude and velocity setpoints plus potential-field gains."""

    z_d: float = 1.0
    v_dx: float = 0.1
    v_dy: float = 0.0
    yaw_rate_magnitude: float = 0.2
    influence_distance: float = 2.0
    k_rep: float = 0.05
    v_max_factor: float = 1.5

    def __post_init__(self):
        if not self.z_d > 0:
            raise ValueError(f"z_d must be positive, got {self.z_d}")
        if not self.yaw_rate_magnitude > 0:
            raise ValueError(f"yaw_rate_magnitude must be positive, got {self.yaw_rate_magnitude}")
        if not (self.influence_distance > 0 and self.k_rep >= 0 and self.v_max_factor > 0):
            raise ValueError("potential-field gains must be positive")
        for name in ("z_d", "v_dx", "v_dy", "yaw_rate_magnitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def v_max(self) -> float:
        return self.v_max_factor * abs(self.v_dx)


@dataclass(frozen=True)
class VelocityCommand:
    """Body-frame velocity, altitude setpoint and yaw rate."""

    vx: float
    vy: float
    z: float
    yaw_rate: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.vx, self.vy, self.z, self.yaw_rate)):
            raise ValueError("command values must be finite")


@dataclass(frozen=True)
class LidarScan:
    """Planar range scan; bearings in the body frame, counter-clockwise from forward."""

    bearings: np.ndarray
    ranges: np.ndarray
    max_range: float

    def __post_init__(self):
        b = np.asarray(self.bearings, dtype=np.float64)
        r = np.asarray(self.ranges, dtype=np.float64)
        if b.ndim != 1 or b.shape != r.shape:
            raise ValueError("bearings and ranges must be 1-D arrays of equal length")
        if b.size and np.any(np.diff(b) <= 0):
            raise ValueError("bearings must be strictly increasing")
        if np.any(~(r > 0)) or np.any(r > self.max_range):
            raise ValueError("ranges must lie in (0, max_range]")
        object.__setattr__(self, "bearings", b)
        object.__setattr__(self, "ranges", r)

    def __len__(self):
        return self.ranges.size

    def mirrored(self) -> "LidarScan":
        """The scan reflected about the forward axis."""
        return LidarScan(-self.bearings[::-1], self.ranges[::-1].copy(), self.max_range)


def class_to_heading_rate(label, cfg: SetpointConfig = SetpointConfig()) -> float:
    """Left -> -magnitude, Center -> 0, Right -> +magnitude."""
    label = ClassLabel(label)
    if label is ClassLabel.LEFT:
        return -cfg.yaw_rate_magnitude
    if label is ClassLabel.RIGHT:
        return cfg.yaw_rate_magnitude
    return 0.0


def smooth_labels(window) -> ClassLabel:
    """Majority vote over the window; ties go to the most recent tied label."""
    labels = [ClassLabel(lab) for lab in window]
    if not labels:
        raise ValueError("smoothing window is empty")
    counts = Counter(labels)
    best = max(counts.values())
    for lab in reversed(labels):
        if counts[lab] == best:
            return lab
    raise AssertionError("unreachable")


def potential_field_velocity(scan: LidarScan, cfg: SetpointConfig = SetpointConfig()):
    """(vx, vy) from a forward attraction plus inverse-square beam repulsion."""
    if len(scan) == 0:
        raise ValueError("empty lidar scan")
    d0 = cfg.influence_distance
    r = scan.ranges
    near = r < d0
    mag = np.where(near, cfg.k_rep * (1.0 / r - 1.0 / d0) / r ** 2, 0.0)
    # fsum is correctly rounded, so a mirrored scan gives exactly -vy
    vx = cfg.v_dx - math.fsum(mag * np.cos(scan.bearings))
    vy = cfg.v_dy - math.fsum(mag * np.sin(scan.bearings))
    norm = math.hypot(vx, vy)
    v_max = cfg.v_max
    if norm > v_max:
        scale = v_max / norm if norm > 0 else 0.0
        vx, vy = vx * scale, vy * scale
    return vx, vy


def assemble_command(label, scan: LidarScan | None = None,
                     cfg: SetpointConfig = SetpointConfig()) -> VelocityCommand:
    yaw_rate = class_to_heading_rate(label, cfg)
    if scan is None:
        vx, vy = cfg.v_dx, cfg.v_dy
    else:
        vx, vy = potential_field_velocity(scan, cfg)
    return VelocityCommand(vx, vy, cfg.z_d, yaw_rate)


class CommandHold:
    """Keep the last command through short classifier dropouts.

    After ``hold_time`` seconds without a fresh command the vehicle is told to
    hover in place at the last altitude setpoint.
    """

    def __init__(self, hold_time: float = 0.5):
        if hold_time < 0:
            raise ValueError("hold_time must be non-negative")
        self.hold_time = hold_time
        self._last = None
        self._stamp = None

    def update(self, t: float, cmd: VelocityCommand | None, z_default: float = 1.0) -> VelocityCommand:
        if cmd is not None:
            self._last, self._stamp = cmd, t
            return cmd
        if self._last is not None and t - self._stamp <= self.hold_time:
            return self._last
        z = self._last.z if self._last is not None else z_default
        return VelocityCommand(0.0, 0.0, z, 0.0)
