"""Tunnel simulator: geometry, rendering, lidar, vehicle dynamics, data
generation and closed-loop flight."""

from .camera import CameraIntrinsics, IlluminationModel, render_camera, simulate_lidar
from .dataset import RigConfig, Sample, generate_dataset, read_dataset, write_dataset
from .dynamics import MavState, check_collision, step_dynamics, wrap_angle
from .flight import (ConstantClassifier, CnnClassifier, FlightConfig, FlightLog, HeadingOracle,
                     run_closed_loop, velocity_sweep)
from .tunnel import TunnelMap, TunnelParams, generate_tunnel, max_heading_change

__all__ = [
    "CameraIntrinsics", "IlluminationModel", "render_camera", "simulate_lidar",
    "RigConfig", "Sample", "generate_dataset", "read_dataset", "write_dataset",
    "MavState", "check_collision", "step_dynamics", "wrap_angle",
    "ConstantClassifier", "CnnClassifier", "FlightConfig", "FlightLog", "HeadingOracle",
    "run_closed_loop", "velocity_sweep",
    "TunnelMap", "TunnelParams", "generate_tunnel", "max_heading_change",
]
