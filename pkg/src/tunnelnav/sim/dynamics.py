"""Kinematic floating-object vehicle: first-order velocity and altitude lag,
exact yaw integration."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..controller import VelocityCommand

DEFAULT_RADIUS = 0.35


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class MavState:
    """World position, yaw and realized body-frame velocity."""

    x: float
    y: float
    z: float
    psi: float
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"altitude must be non-negative, got {self.z}")
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    def progress(self, tunnel) -> float:
        """Arclength of the closest centerline point."""
        return tunnel.local(self.x, self.y)[0]


def _lag(current, target, dt, tau):
    """End value and step average of a first-order lag toward a constant target."""
    if tau <= 0:
        return target, target
    a = math.exp(-dt / tau)
    end = target + (current - target) * a
    avg = target + (current - target) * (tau / dt) * (1.0 - a)
    return end, avg


def step_dynamics(state: MavState, cmd: VelocityCommand, dt: float,
                  tau_v: float = 0.3, tau_z: float = 0.5) -> MavState:
    """Advance the vehicle by ``dt`` seconds under a constant command.

    Body velocity and altitude relax toward their setpoints exactly (the
    exponential solution); position moves by the step-averaged body velocity
    rotated by the mid-step yaw, so with zero lag the displacement length is
    exactly the commanded speed times ``dt``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if tau_v < 0 or tau_z < 0:
        raise ValueError("time constants must be non-negative")
    vx, vx_avg = _lag(state.vx, cmd.vx, dt, tau_v)
    vy, vy_avg = _lag(state.vy, cmd.vy, dt, tau_v)
    z, _ = _lag(state.z, cmd.z, dt, tau_z)
    psi_mid = state.psi + 0.5 * cmd.yaw_rate * dt
    c, s = math.cos(psi_mid), math.sin(psi_mid)
    return MavState(
        x=state.x + (c * vx_avg - s * vy_avg) * dt,
        y=state.y + (s * vx_avg + c * vy_avg) * dt,
        z=max(z, 0.0),
        psi=state.psi + cmd.yaw_rate * dt,
        vx=vx,
        vy=vy,
        vz=(z - state.z) / dt,
    )


def check_collision(tunnel, state: MavState, radius: float = DEFAULT_RADIUS) -> float:
    """Side-wall clearance minus the platform radius; <= 0 means collided."""
    left, right, _, _ = tunnel.gaps(state.x, state.y, state.z)
    return min(left, right) - radius

