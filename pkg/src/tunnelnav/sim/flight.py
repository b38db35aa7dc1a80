"""Closed-loop flight: camera -> classifier -> command -> vehicle dynamics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..cnn.model import CnnModel
from ..cnn.train import predict
from ..controller import CommandHold, SetpointConfig, assemble_command, smooth_labels
from ..labels import ClassLabel
from .camera import CameraIntrinsics, IlluminationModel, render_camera, simulate_lidar
from .dynamics import DEFAULT_RADIUS, MavState, check_collision, step_dynamics, wrap_angle

COMPLETED = "completed"
COLLIDED = "collided"
TIMED_OUT = "timed out"

LOG_COLUMNS = ("t", "x", "y", "z", "psi", "vx", "vy", "vz", "label", "cmd_yaw_rate", "clearance", "outcome")


class ConstantClassifier:
    """Oracle that always answers the same label."""

    def __init__(self, label):
        self.label = ClassLabel.parse(label)

    def classify(self, img):
        return self.label


class CnnClassifier:
    def __init__(self, model: CnnModel):
        self.model = model

    def classify(self, img):
        return predict(self.model, img)[0]


class HeadingOracle:
    """Labels from ground truth instead of the image.

    The heading is compared with the bearing of the centerline point
    ``lookahead`` meters ahead, so lateral offsets are corrected too. Handy
    for checking the loop itself.
    """

    def __init__(self, tunnel, threshold=math.radians(10.0), lookahead=4.0):
        self.tunnel = tunnel
        self.threshold = threshold
        self.lookahead = lookahead
        self.state = None

    def classify(self, img):
        s, _, _ = self.tunnel.local(self.state.x, self.state.y)
        ax, ay, _ = self.tunnel.pose_at(s + self.lookahead)
        err = wrap_angle(self.state.psi - math.atan2(ay - self.state.y, ax - self.state.x))
        if err > self.threshold:
            return ClassLabel.LEFT
        if err < -self.threshold:
            return ClassLabel.RIGHT
        return ClassLabel.CENTER


def as_classifier(obj):
    if isinstance(obj, CnnModel):
        return CnnClassifier(obj)
    if hasattr(obj, "classify"):
        return obj
    if hasattr(obj, "model_"):
        return CnnClassifier(obj.model_)
    if isinstance(obj, (ClassLabel, str, int)):
        return ConstantClassifier(obj)
    raise TypeError(f"cannot use {type(obj).__name__} as a heading classifier")


@dataclass(frozen=True)
class FlightConfig:
    """Timing, vehicle response and start pose of a closed-loop run.

    The start pose is jittered by up to ``start_lateral_jitter`` meters and
    ``start_yaw_jitter`` radians from the seed. ``max_time`` defaults to
    twice the nominal traversal time plus a minute.
    """

    dt: float = 0.02
    control_rate: float = 5.0
    max_time: float | None = None
    tau_v: float = 0.3
    tau_z: float = 0.5
    radius: float = DEFAULT_RADIUS
    start_s: float = 0.0
    start_lateral: float = 0.0
    start_yaw: float = 0.0
    start_lateral_jitter: float = 0.2
    start_yaw_jitter: float = math.radians(5.0)
    smoothing_window: int = 1
    use_lidar: bool = False
    lidar_beams: int = 72
    lidar_range: float = 10.0
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    illumination: IlluminationModel = field(default_factory=IlluminationModel)

    def substeps(self) -> int:
        if not (self.dt > 0 and self.control_rate > 0):
            raise ValueError("dt and control_rate must be positive")
        ratio = 1.0 / (self.control_rate * self.dt)
        n = round(ratio)
        if n < 1 or abs(ratio - n) > 1e-9 * ratio:
            raise ValueError(f"control period 1/{self.control_rate} s is not a multiple of dt={self.dt}")
        return n

    def validate(self) -> None:
        self.substeps()
        if self.max_time is not None and not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be at least 1")


@dataclass
class FlightLog:
    header: dict
    rows: list = field(default_factory=list)
    outcome: str = TIMED_OUT

    @property
    def min_clearance(self) -> float:
        return min(r[10] for r in self.rows)

    @property
    def labels(self) -> list:
        return [r[8] for r in self.rows]

    @property
    def yaw_rates(self) -> np.ndarray:
        return np.array([r[9] for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        k = LOG_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.header.items():
            buf.write(f"# {key} = {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in self.rows:
            w.writerow([f"{v:.6f}" for v in r[:8]] + [r[8].name.lower(), f"{r[9]:.6f}", f"{r[10]:.6f}", r[11]])
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())


def run_closed_loop(classifier, tunnel, setpoints: SetpointConfig = SetpointConfig(),
                    flight: FlightConfig = FlightConfig(), seed: int = 0) -> FlightLog:
    """Fly the tunnel from ``flight.start_s`` until collision, exit or timeout.

    At every control tick the camera is rendered at the current pose, the
    label is turned into a command, and the dynamics are integrated at
    ``flight.dt`` until the next tick. One log row is written per tick plus
    a final row at termination.
    """
    flight.validate()
    n_sub = flight.substeps()
    clf = as_classifier(classifier)
    rng = np.random.default_rng(seed)
    max_time = flight.max_time
    if max_time is None:
        speed = max(abs(setpoints.v_dx), 1e-3)
        max_time = 2.0 * (tunnel.length - flight.start_s) / speed + 60.0
    lateral = flight.start_lateral + rng.uniform(-1, 1) * flight.start_lateral_jitter
    yaw_err = flight.start_yaw + rng.uniform(-1, 1) * flight.start_yaw_jitter
    x, y, tangent = tunnel.pose_at(flight.start_s, lateral)
    state = MavState(x, y, setpoints.z_d, tangent + yaw_err)
    header = {"tunnel": asdict(tunnel.params), "setpoints": asdict(setpoints), "seed": seed,
              "dt": flight.dt, "control_rate": flight.control_rate, "max_time": max_time,
              "tau_v": flight.tau_v, "tau_z": flight.tau_z, "radius": flight.radius,
              "start_lateral": lateral, "start_yaw_error": yaw_err,
              "illumination": asdict(flight.illumination), "intrinsics": asdict(flight.intrinsics)}
    log = FlightLog(header)
    window = []
    hold = CommandHold()
    step = 0
    clearance = check_collision(tunnel, state, flight.radius)
    outcome = COLLIDED if clearance <= 0 else None
    label = ClassLabel.CENTER
    cmd = None
    while outcome is None:
        t = step * flight.dt
        if hasattr(clf, "state"):
            clf.state = state
        img = render_camera(tunnel, state, flight.intrinsics, flight.illumination, seed=rng)
        raw = clf.classify(img)
        window = (window + [ClassLabel(raw)])[-flight.smoothing_window:]
        label = smooth_labels(window)
        scan = None
        if flight.use_lidar:
            scan = simulate_lidar(tunnel, state, flight.lidar_beams, flight.lidar_range)
        cmd = hold.update(t, assemble_command(label, scan, setpoints))
        log.rows.append((t, state.x, state.y, state.z, state.psi, state.vx, state.vy, state.vz,
                         label, cmd.yaw_rate, clearance, ""))
        for _ in range(n_sub):
            state = step_dynamics(state, cmd, flight.dt, flight.tau_v, flight.tau_z)
            step += 1
            clearance = check_collision(tunnel, state, flight.radius)
            if clearance <= 0:
                outcome = COLLIDED
            elif state.progress(tunnel) >= tunnel.length:
                outcome = COMPLETED
            elif step * flight.dt >= max_time - 1e-9:
                outcome = TIMED_OUT
            if outcome is not None:
                break
    yaw_rate = cmd.yaw_rate if cmd is not None else 0.0
    log.rows.append((step * flight.dt, state.x, state.y, state.z, state.psi, state.vx, state.vy, state.vz,
                     label, yaw_rate, clearance, outcome))
    log.outcome = outcome
    return log


def velocity_sweep(classifier, tunnel, velocities=(0.1, 0.5, 1.0), seeds=range(10),
                   setpoints: SetpointConfig = SetpointConfig(), flight: FlightConfig = FlightConfig()):
    """Closed-loop runs for every (velocity, seed) pair; returns {velocity: [FlightLog]}."""
    out = {}
    for v in velocities:
        sp = SetpointConfig(**{**asdict(setpoints), "v_dx": float(v)})
        out[v] = [run_closed_loop(classifier, tunnel, sp, flight, seed=s) for s in seeds]
    return out
