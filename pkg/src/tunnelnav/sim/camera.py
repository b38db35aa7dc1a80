"""Headlamp-lit pinhole camera and planar lidar on top of the ray marcher."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..controller import LidarScan
from ..imaging import GrayImage
from . import _geometry as G

CAMERA_MAX_RANGE = 25.0


@dataclass(frozen=True)
class CameraIntrinsics:
    hfov: float = math.radians(80.0)
    width: int = 128
    height: int = 128
    mount_yaw: float = 0.0

    def __post_init__(self):
        if not 0 < self.hfov < math.pi:
            raise ValueError(f"horizontal field of view must lie in (0, pi), got {self.hfov}")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")


@dataclass(frozen=True)
class IlluminationModel:
    """Light co-located with the camera.

    ``intensity`` scales a source that lights a frontal wall at 1 m to about
    180 gray levels when it is 1.0. ``ambient`` and ``noise_sigma`` are in
    gray levels, ``falloff`` is the distance in meters at which the
    inverse-square term halves.
    """

    intensity: float = 1.0
    ambient: float = 0.0
    falloff: float = 1.55
    noise_sigma: float = 2.0

    def __post_init__(self):
        if min(self.intensity, self.ambient, self.noise_sigma) < 0 or not self.falloff > 0:
            raise ValueError("illumination parameters must be non-negative (falloff positive)")
        if self.ambient >= 255:
            raise ValueError("ambient must be below 255")

    def scaled(self, multiplier: float) -> "IlluminationModel":
        return IlluminationModel(self.intensity * multiplier, self.ambient, self.falloff, self.noise_sigma)


def render_radiance(tunnel, x, y, z, yaw, intrinsics=CameraIntrinsics(), illum=IlluminationModel()):
    """Noise-free rendered intensities as a float array in [0, 255]."""
    if not tunnel.contains(x, y, z):
        raise ValueError(f"camera position ({x:.3f}, {y:.3f}, {z:.3f}) is outside the tunnel")
    out = np.empty((intrinsics.height, intrinsics.width))
    G.render(tunnel.segments, tunnel.tables, tunnel.grid, tunnel.width, tunnel.height,
             float(x), float(y), float(z), float(yaw + intrinsics.mount_yaw), intrinsics.hfov,
             intrinsics.width, intrinsics.height, 255.0 * illum.intensity, illum.ambient,
             illum.falloff, CAMERA_MAX_RANGE, out)
    return out


def render_camera(tunnel, state, intrinsics=CameraIntrinsics(), illum=IlluminationModel(),
                  seed=None) -> GrayImage:
    """Render the view from ``state`` and quantize to 8 bits.

    Gaussian sensor noise of ``illum.noise_sigma`` gray levels is drawn from
    a generator seeded by ``seed`` (or used directly if a Generator is given).
    """
    img = render_radiance(tunnel, state.x, state.y, state.z, state.psi, intrinsics, illum)
    if illum.noise_sigma > 0:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        img += rng.normal(0.0, illum.noise_sigma, img.shape)
    return GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def lidar_bearings(n_beams: int) -> np.ndarray:
    return -math.pi + 2 * math.pi * np.arange(n_beams) / n_beams


def simulate_lidar(tunnel, state, n_beams: int = 360, max_range: float = 10.0) -> LidarScan:
    """Horizontal scan at the vehicle height; misses report ``max_range``."""
    if n_beams < 1 or not max_range > 0:
        raise ValueError("n_beams and max_range must be positive")
    if not tunnel.contains(state.x, state.y, state.z):
        raise ValueError("lidar position is outside the tunnel")
    bearings = lidar_bearings(n_beams)
    ranges = np.empty(n_beams)
    G.lidar(tunnel.segments, tunnel.tables, tunnel.grid, tunnel.width, tunnel.height,
            float(state.x), float(state.y), float(state.z), float(state.psi), bearings,
            float(max_range), ranges)
    return LidarScan(bearings, np.minimum(ranges, max_range), float(max_range))
