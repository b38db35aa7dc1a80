import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tunnelnav.controller import (
    CommandHold,
    LidarScan,
    SetpointConfig,
    VelocityCommand,
    assemble_command,
    class_to_heading_rate,
    potential_field_velocity,
    smooth_labels,
)
from tunnelnav.labels import ClassLabel

L, C, R = ClassLabel.LEFT, ClassLabel.CENTER, ClassLabel.RIGHT


def scan_from(ranges, max_range=10.0):
    n = len(ranges)
    return LidarScan(-math.pi + 2 * math.pi * np.arange(n) / n, np.asarray(ranges, float), max_range)


def test_heading_rates():
    assert class_to_heading_rate(L) == -0.2
    assert class_to_heading_rate(C) == 0.0
    assert class_to_heading_rate(R) == 0.2


@given(st.floats(0.01, 5))
def test_heading_rate_antisymmetric(mag):
    cfg = SetpointConfig(yaw_rate_magnitude=mag)
    assert class_to_heading_rate(L, cfg) == -class_to_heading_rate(R, cfg) == -mag
    assert class_to_heading_rate(C, cfg) == 0


def test_setpoint_validation():
    with pytest.raises(ValueError):
        SetpointConfig(z_d=0)
    with pytest.raises(ValueError):
        SetpointConfig(yaw_rate_magnitude=0)
    with pytest.raises(ValueError):
        VelocityCommand(math.nan, 0, 1, 0)


def test_smoothing():
    assert smooth_labels([R]) is R
    assert smooth_labels([L, L, R]) is L
    assert smooth_labels([L, R]) is R
    assert smooth_labels([C, L, R, L, R]) is R
    with pytest.raises(ValueError):
        smooth_labels([])


@given(st.lists(st.sampled_from(list(ClassLabel)), min_size=1, max_size=8))
def test_smoothing_window_one_is_identity(window):
    assert smooth_labels(window[-1:]) is window[-1]


def test_potential_field_no_repulsion():
    assert potential_field_velocity(scan_from([10.0] * 8), SetpointConfig(v_dx=0.5)) == (0.5, 0.0)


def test_potential_field_left_beam_pushes_right():
    cfg = SetpointConfig(v_dx=0.5)
    scan = LidarScan(np.array([math.pi / 2]), np.array([1.0]), 10.0)
    vx, vy = potential_field_velocity(scan, cfg)
    mag = 0.05 * (1 / 1.0 - 1 / 2.0) / 1.0 ** 2
    assert vy < 0
    assert vy == pytest.approx(-mag, abs=1e-15)
    assert vx == pytest.approx(0.5 - mag * math.cos(math.pi / 2), abs=1e-15)


def test_potential_field_clamped():
    cfg = SetpointConfig(v_dx=0.1)
    scan = LidarScan(np.array([0.0]), np.array([0.2]), 10.0)
    vx, vy = potential_field_velocity(scan, cfg)
    assert math.hypot(vx, vy) <= cfg.v_max + 1e-12
    with pytest.raises(ValueError):
        potential_field_velocity(LidarScan(np.array([]), np.array([]), 1.0), cfg)


range_lists = st.lists(st.floats(0.05, 10.0), min_size=2, max_size=24)


@given(range_lists, st.floats(0.1, 1.0))
def test_potential_field_norm_bound(ranges, v):
    cfg = SetpointConfig(v_dx=v)
    vx, vy = potential_field_velocity(scan_from(ranges), cfg)
    assert math.hypot(vx, vy) <= cfg.v_max * (1 + 1e-12)


@given(range_lists)
def test_mirrored_scan_negates_vy(ranges):
    scan = LidarScan(np.linspace(-3.0, 3.0, len(ranges)), np.array(ranges), 10.0)
    cfg = SetpointConfig(v_dx=0.5)
    vx, vy = potential_field_velocity(scan, cfg)
    mx, my = potential_field_velocity(scan.mirrored(), cfg)
    assert mx == pytest.approx(vx, abs=1e-12)
    assert my == -vy


def test_symmetric_scan_has_no_lateral_velocity():
    half = [3.0, 1.5, 1.2, 0.9, 2.5]
    b = np.array([-2.0, -1.5, -1.0, -0.5, -0.2, 0.2, 0.5, 1.0, 1.5, 2.0])
    scan = LidarScan(b, np.array(half + half[::-1]), 10.0)
    cfg = SetpointConfig(v_dx=0.5)
    vx, vy = potential_field_velocity(scan, cfg)
    assert abs(vy) < 1e-9 and vx <= cfg.v_max


@given(st.floats(0.3, 5.0), st.floats(1e-6, 1e-3))
def test_potential_field_continuous_in_range(r, eps):
    cfg = SetpointConfig(v_dx=0.5)
    a = potential_field_velocity(LidarScan(np.array([0.7]), np.array([r]), 10.0), cfg)
    b = potential_field_velocity(LidarScan(np.array([0.7]), np.array([r + eps]), 10.0), cfg)
    # |d mag / dr| <= 3 k / r^4 and the clamp is 1-Lipschitz
    assert math.hypot(a[0] - b[0], a[1] - b[1]) <= 3 * 0.05 / 0.3 ** 4 * eps + 1e-12


def test_scan_validation():
    with pytest.raises(ValueError):
        LidarScan(np.array([0.0, 0.0]), np.array([1.0, 1.0]), 5.0)
    with pytest.raises(ValueError):
        LidarScan(np.array([0.0]), np.array([0.0]), 5.0)
    with pytest.raises(ValueError):
        LidarScan(np.array([0.0]), np.array([6.0]), 5.0)


def test_assemble_command():
    assert assemble_command(C) == VelocityCommand(0.1, 0.0, 1.0, 0.0)
    assert assemble_command(L) == VelocityCommand(0.1, 0.0, 1.0, -0.2)
    half = [1.0, 1.5, 2.5]
    b = np.array([-1.5, -1.0, -0.5, 0.5, 1.0, 1.5])
    cmd = assemble_command(C, LidarScan(b, np.array(half + half[::-1]), 10.0))
    assert abs(cmd.vy) < 1e-9 and cmd.vx <= SetpointConfig().v_max


def test_command_hold():
    hold = CommandHold(0.5)
    cmd = VelocityCommand(0.5, 0.0, 1.0, 0.2)
    assert hold.update(0.0, cmd) is cmd
    assert hold.update(0.4, None) is cmd
    assert hold.update(0.6, None) == VelocityCommand(0.0, 0.0, 1.0, 0.0)
