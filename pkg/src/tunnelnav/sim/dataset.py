"""Labeled training images from an emulated left/center/right camera rig."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..imaging import LABEL_DIRS, GrayImage, read_pgm, write_pgm
from ..labels import ClassLabel
from .camera import CameraIntrinsics, IlluminationModel, render_camera
from .dynamics import MavState

ILLUMINATION_LEVELS = (0.25, 0.5, 1.0, 2.0)
MANIFEST = "manifest.csv"


@dataclass(frozen=True)
class RigConfig:
    """Pose sampling and camera setup of the labeling rig.

    Poses are drawn uniformly over ``span`` meters of arclength centered on
    ``s_center`` (the tunnel middle when None). A Left image comes from the
    camera turned ``offset`` to the left of the tunnel axis.
    """

    offset: float = math.radians(30.0)
    altitude: float = 1.0
    span: float = 80.0
    s_center: float | None = None
    lateral_jitter: float = 0.3
    vertical_jitter: float = 0.05
    yaw_jitter: float = math.radians(3.0)
    illumination_levels: tuple = ILLUMINATION_LEVELS
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    illumination: IlluminationModel = field(default_factory=IlluminationModel)

    def __post_init__(self):
        if self.span < 0 or min(self.lateral_jitter, self.vertical_jitter, self.yaw_jitter) < 0:
            raise ValueError("span and jitters must be non-negative")
        if not self.illumination_levels or min(self.illumination_levels) < 0:
            raise ValueError("illumination levels must be a nonempty list of non-negative multipliers")


@dataclass
class Sample:
    image: GrayImage
    label: ClassLabel
    illumination: float
    s: float = 0.0
    lateral: float = 0.0
    z: float = 0.0
    yaw_offset: float = 0.0
    name: str = ""

    @property
    def tags(self) -> dict:
        return {"illumination": self.illumination}


# yaw offsets of the three rig cameras, positive turns left
RIG_YAW_SIGN = {ClassLabel.LEFT: 1.0, ClassLabel.CENTER: 0.0, ClassLabel.RIGHT: -1.0}


def generate_dataset(tunnel, n_per_class: int, rig: RigConfig = RigConfig(), seed: int = 0) -> list[Sample]:
    """Render ``n_per_class`` poses, each seen by the left, center and right camera.

    Every image draws its own illumination multiplier and sensor noise, so
    the output is a deterministic function of (tunnel, rig, seed).
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    rng = np.random.default_rng(seed)
    s_center = tunnel.length / 2 if rig.s_center is None else rig.s_center
    s_lo = max(0.0, s_center - rig.span / 2)
    s_hi = min(tunnel.length, s_center + rig.span / 2)
    samples = []
    for k in range(n_per_class):
        s = rng.uniform(s_lo, s_hi)
        lateral = rng.uniform(-rig.lateral_jitter, rig.lateral_jitter)
        z = rig.altitude + rng.uniform(-rig.vertical_jitter, rig.vertical_jitter)
        yaw_err = rng.uniform(-rig.yaw_jitter, rig.yaw_jitter)
        x, y, tangent = tunnel.pose_at(s, lateral)
        for label, sign in RIG_YAW_SIGN.items():
            level = float(rng.choice(rig.illumination_levels))
            yaw = tangent + yaw_err + sign * rig.offset
            img = render_camera(tunnel, MavState(x, y, z, yaw), rig.intrinsics,
                                rig.illumination.scaled(level), seed=rng)
            samples.append(Sample(img, label, level, s, lateral, z, yaw - tangent,
                                  f"{LABEL_DIRS[label]}_{k:05d}"))
    return samples


def write_dataset(samples, root) -> Path:
    """Write ``<root>/<label>/<name>.pgm`` plus a manifest CSV with the pose and light tags."""
    root = Path(root)
    for name in LABEL_DIRS.values():
        (root / name).mkdir(parents=True, exist_ok=True)
    with open(root / MANIFEST, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "label", "illumination", "s", "lateral", "z", "yaw_offset"])
        for smp in samples:
            rel = f"{LABEL_DIRS[smp.label]}/{smp.name}.pgm"
            write_pgm(root / rel, smp.image)
            w.writerow([rel, smp.label.name.lower(), repr(smp.illumination), f"{smp.s:.6f}",
                        f"{smp.lateral:.6f}", f"{smp.z:.6f}", f"{smp.yaw_offset:.6f}"])
    return root


def read_dataset(root) -> list[Sample]:
    """Load a dataset directory, using the manifest tags when one is present."""
    from ..imaging import load_dataset_dir

    root = Path(root)
    manifest = root / MANIFEST
    if not manifest.exists():
        return [Sample(img, label, float("nan"), name=path.stem)
                for path, img, label in load_dataset_dir(root)]
    samples = []
    with open(manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            label = ClassLabel.parse(row["label"])
            samples.append(Sample(read_pgm(root / row["path"]), label, float(row["illumination"]),
                                  float(row["s"]), float(row["lateral"]), float(row["z"]),
                                  float(row["yaw_offset"]), Path(row["path"]).stem))
    if not samples:
        raise ValueError(f"dataset manifest {manifest} lists no images")
    return samples
