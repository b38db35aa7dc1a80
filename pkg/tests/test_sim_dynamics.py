import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tunnelnav.controller import VelocityCommand
from tunnelnav.sim import MavState, check_collision, generate_tunnel, step_dynamics
from tunnelnav.sim.dynamics import wrap_angle


@pytest.fixture(scope="module")
def straight():
    return generate_tunnel(0, roughness=0.0, arc_angle_deg=0.0)


def test_hover_is_a_fixed_point():
    s = MavState(3.0, -1.0, 1.0, 0.4)
    for _ in range(10):
        s = step_dynamics(s, VelocityCommand(0.0, 0.0, 1.0, 0.0), 0.02)
    assert s == MavState(3.0, -1.0, 1.0, 0.4)


def test_yaw_rate_integrates_exactly():
    s = MavState(0.0, 0.0, 1.0, 0.0)
    for _ in range(50):
        s = step_dynamics(s, VelocityCommand(0.0, 0.0, 1.0, 0.2), 0.02, tau_v=0.0, tau_z=0.0)
    assert s.psi == pytest.approx(0.2, abs=1e-12)


def test_velocity_lag_follows_exponential():
    s = MavState(0.0, 0.0, 1.0, 0.0)
    for _ in range(25):
        s = step_dynamics(s, VelocityCommand(1.0, 0.0, 1.0, 0.0), 0.02, tau_v=0.5)
    assert s.vx == pytest.approx(1 - math.exp(-1.0), abs=1e-12)
    # distance is the integral of the lagged speed
    assert s.x == pytest.approx(0.5 - 0.5 * (1 - math.exp(-1.0)), abs=1e-12)


def test_altitude_lag():
    s = MavState(0.0, 0.0, 0.0, 0.0)
    s = step_dynamics(s, VelocityCommand(0.0, 0.0, 2.0, 0.0), 0.5, tau_z=0.5)
    assert s.z == pytest.approx(2 * (1 - math.exp(-1.0)), abs=1e-12)
    assert s.vz == pytest.approx(s.z / 0.5)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(-math.pi, math.pi),
       st.floats(0.001, 0.5))
def test_zero_lag_step_length_equals_commanded_speed(vx, vy, rate, psi, dt):
    s = MavState(1.0, 2.0, 1.0, psi, vx, vy)
    n = step_dynamics(s, VelocityCommand(vx, vy, 1.0, rate), dt, tau_v=0.0, tau_z=0.0)
    assert math.hypot(n.x - s.x, n.y - s.y) == pytest.approx(math.hypot(vx, vy) * dt, rel=1e-12, abs=1e-15)


@given(st.floats(-50, 50))
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


def test_yaw_wraps_across_pi():
    s = MavState(0.0, 0.0, 1.0, math.pi - 0.01)
    n = step_dynamics(s, VelocityCommand(0.0, 0.0, 1.0, 1.0), 0.02, tau_v=0.0)
    assert n.psi == pytest.approx(-math.pi + 0.01, abs=1e-12)
    assert MavState(0, 0, 1, -math.pi).psi == math.pi


def test_state_and_step_validation():
    with pytest.raises(ValueError):
        MavState(0.0, 0.0, -0.1, 0.0)
    with pytest.raises(ValueError):
        step_dynamics(MavState(0, 0, 1, 0), VelocityCommand(0, 0, 1, 0), 0.0)


def test_clearance_centered(straight):
    assert check_collision(straight, MavState(100.0, 0.0, 1.0, 0.0)) == pytest.approx(2.65, abs=1e-3)


def test_touching_the_wall_collides(straight):
    assert check_collision(straight, MavState(100.0, 2.65, 1.0, 0.0)) <= 1e-3
    assert check_collision(straight, MavState(100.0, -2.8, 1.0, 0.0)) < 0


def test_clearance_shrinks_toward_the_wall(straight):
    c = [check_collision(straight, MavState(100.0, y, 1.0, 0.0)) for y in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)]
    assert all(a > b for a, b in zip(c, c[1:]))
