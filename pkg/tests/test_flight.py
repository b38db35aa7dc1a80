import math

import numpy as np
import pytest

from tunnelnav.controller import SetpointConfig
from tunnelnav.labels import ClassLabel
from tunnelnav.sim import generate_tunnel
from tunnelnav.sim.flight import (
    COLLIDED,
    COMPLETED,
    TIMED_OUT,
    ConstantClassifier,
    FlightConfig,
    HeadingOracle,
    run_closed_loop,
    velocity_sweep,
)

# a short straight tunnel keeps these flights to a few hundred ticks
SHORT = dict(roughness=0.0, arc_angle_deg=0.0, length=30.0)
ALIGNED = FlightConfig(start_lateral_jitter=0.0, start_yaw_jitter=0.0)


@pytest.fixture(scope="module")
def short_straight():
    return generate_tunnel(0, **SHORT)


def test_center_oracle_flies_straight(short_straight):
    log = run_closed_loop(ConstantClassifier("center"), short_straight, SetpointConfig(v_dx=1.0), ALIGNED)
    assert log.outcome == COMPLETED
    assert np.all(log.column("psi") == 0.0)
    assert np.all(log.column("y") == 0.0)
    assert log.min_clearance == pytest.approx(2.65, abs=1e-3)


def test_left_oracle_turns_right_into_the_wall(short_straight):
    log = run_closed_loop(ConstantClassifier(ClassLabel.LEFT), short_straight, SetpointConfig(v_dx=1.0), ALIGNED)
    assert log.outcome == COLLIDED
    psi = log.column("psi")
    assert np.all(np.diff(psi) < 0)
    assert np.all(log.yaw_rates == -0.2)
    assert log.rows[-1][2] < 0


def test_log_invariants(short_straight):
    log = run_closed_loop(HeadingOracle(short_straight), short_straight, SetpointConfig(v_dx=1.0), seed=3)
    t = log.column("t")
    assert np.all(np.diff(t) > 0)
    assert log.outcome == COMPLETED
    assert all(r[10] > 0 for r in log.rows)
    assert set(log.yaw_rates) <= {-0.2, 0.0, 0.2}
    # one row per control tick at 5 Hz
    assert np.allclose(np.diff(t[:-1]), 0.2)


def test_timeout(short_straight):
    log = run_closed_loop(ConstantClassifier("center"), short_straight, SetpointConfig(v_dx=0.1),
                          FlightConfig(max_time=2.0))
    assert log.outcome == TIMED_OUT and log.rows[-1][0] == pytest.approx(2.0)


def test_flight_is_seeded(short_straight):
    sp = SetpointConfig(v_dx=1.0)
    a = run_closed_loop(HeadingOracle(short_straight), short_straight, sp, seed=1)
    b = run_closed_loop(HeadingOracle(short_straight), short_straight, sp, seed=1)
    c = run_closed_loop(HeadingOracle(short_straight), short_straight, sp, seed=2)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != c.to_csv()


def test_csv_layout(short_straight, tmp_path):
    log = run_closed_loop(ConstantClassifier("center"), short_straight, SetpointConfig(v_dx=1.0),
                          FlightConfig(max_time=1.0))
    log.save(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    assert any(ln.startswith("# seed = 0") for ln in header)
    body = lines[len(header):]
    assert body[0].split(",") == ["t", "x", "y", "z", "psi", "vx", "vy", "vz", "label", "cmd_yaw_rate",
                                  "clearance", "outcome"]
    assert body[-1].endswith(TIMED_OUT) and len(body) == len(log.rows) + 1


def test_pursuit_oracle_completes_the_s_tunnel():
    tunnel = generate_tunnel(0, length=120.0)
    log = run_closed_loop(HeadingOracle(tunnel), tunnel, SetpointConfig(v_dx=1.0), seed=0)
    assert log.outcome == COMPLETED and log.min_clearance > 1.0


def test_invalid_timing(short_straight):
    with pytest.raises(ValueError):
        run_closed_loop("center", short_straight, flight=FlightConfig(control_rate=7.0))
    with pytest.raises(ValueError):
        run_closed_loop("center", short_straight, flight=FlightConfig(control_rate=0.0))
    with pytest.raises(ValueError):
        run_closed_loop("center", short_straight, flight=FlightConfig(max_time=-1.0))


def test_velocity_sweep(short_straight):
    out = velocity_sweep("center", short_straight, velocities=(0.5, 1.0), seeds=range(2),
                         flight=FlightConfig(max_time=3.0))
    assert sorted(out) == [0.5, 1.0] and all(len(v) == 2 for v in out.values())
    assert out[1.0][0].header["setpoints"]["v_dx"] == 1.0
    x_end = out[1.0][0].rows[-1][1] - out[1.0][0].rows[0][1]
    assert math.isclose(x_end, 2 * (out[0.5][0].rows[-1][1] - out[0.5][0].rows[0][1]), rel_tol=0.05)
