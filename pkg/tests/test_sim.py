import io
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopsim.dynamics import MotorModel
from hopsim.errors import NoConvergence, NoSeparation
from hopsim.model import ContactPhase, Environment, HopResult, MotorCommand, RoverBody, RoverState
from hopsim.sim import (
    CSV_HEADER,
    SimConfig,
    bounce,
    calibrate_motor_gain,
    detect_escape,
    run_hop,
    separation_result,
    write_trajectory_csv,
)


def _kinetic(state, body):
    vx, vy = state.velocity
    return 0.5 * body.mass * (vx * vx + vy * vy) + 0.5 * body.moment_of_inertia * state.angular_velocity**2


def test_detect_escape_examples():
    env = Environment(escape_velocity=200.0)
    assert detect_escape(HopResult.from_components(0.0, 300.0), env)
    assert not detect_escape(HopResult.from_components(0.0, 0.0), env)
    assert not detect_escape(HopResult.from_components(0.0, 200.0), env)


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(step_size=0.1, sample_interval=0.01)
    with pytest.raises(ValueError):
        SimConfig(restitution=1.5)
    with pytest.raises(ValueError):
        SimConfig(step_size=0.0)


def test_zero_duty_never_separates(suite):
    with pytest.raises(NoSeparation):
        run_hop(suite.body, suite.env, MotorCommand(0.0, math.inf, 4.5), suite.motor, replace(suite.sim, max_time=0.5))


def test_plastic_vertical_impact_kills_normal_velocity():
    body = RoverBody()
    state = RoverState((0.0, 100.0), (0.0, -30.0), 0.0, 0.0, ContactPhase.BALLISTIC)
    out = bounce(state, body, Environment(), 0.0)
    rx, ry = min(body.support_points(0.0), key=lambda p: p[1])
    assert out.velocity[1] + out.angular_velocity * rx == pytest.approx(0.0, abs=1e-12)
    assert _kinetic(out, body) <= _kinetic(state, body)


def test_elastic_frictionless_impact_under_the_center():
    body = RoverBody()
    # stand the rover on its contact corner, directly below the center of mass
    attitude = math.atan2(-120.0, 100.0)
    pts = body.support_points(attitude)
    low = min(pts, key=lambda p: p[1])
    assert low[0] == pytest.approx(0.0, abs=1e-9)
    state = RoverState((0.0, -low[1]), (0.0, -25.0), attitude, 0.0, ContactPhase.BALLISTIC)
    out = bounce(state, body, Environment(friction_coefficient=0.0), 1.0)
    assert out.velocity[0] == pytest.approx(0.0, abs=1e-9)
    assert out.velocity[1] == pytest.approx(25.0, rel=1e-9)
    assert out.angular_velocity == pytest.approx(0.0, abs=1e-9)


def test_oblique_impact_loses_energy():
    body = RoverBody()
    state = RoverState((0.0, 100.0), (40.0, -30.0), -0.1, 0.2, ContactPhase.BALLISTIC)
    out = bounce(state, body, Environment(), 0.5)
    assert _kinetic(out, body) < _kinetic(state, body)


def test_separating_contact_is_left_alone():
    body = RoverBody()
    state = RoverState((0.0, 100.0), (3.0, 10.0), 0.0, 0.0, ContactPhase.BALLISTIC)
    assert bounce(state, body, Environment(), 0.5) == state


@settings(max_examples=300)
@given(
    st.floats(-100, 100),
    st.floats(-100, -0.1),
    st.floats(-math.pi, math.pi),
    st.floats(-2, 2),
    st.floats(0, 1),
    st.floats(0, 2),
)
def test_bounce_never_adds_energy(vx, vy, attitude, omega, e, mu):
    body = RoverBody()
    state = RoverState((0.0, 200.0), (vx, vy), attitude, omega, ContactPhase.BALLISTIC)
    out = bounce(state, body, Environment(friction_coefficient=mu), e)
    assert _kinetic(out, body) <= _kinetic(state, body) * (1 + 1e-12) + 1e-12
    rx, ry = min(body.support_points(attitude), key=lambda p: p[1])
    vpy = vy + omega * rx
    if vpy < 0:
        # the contact point no longer approaches the ground
        assert out.velocity[1] + out.angular_velocity * rx >= -1e-9


def test_run_is_deterministic(suite):
    cmd = suite.case("#2")
    a = run_hop(suite.body, suite.env, cmd, suite.motor, suite.sim)
    b = run_hop(suite.body, suite.env, cmd, suite.motor, suite.sim)
    assert a[0] == b[0]
    assert a[1] == b[1]


def test_samples_are_uniform(case_runs, suite):
    for _, trajectory in case_runs.values():
        t = np.array(trajectory.times())
        assert t[0] == 0.0
        assert np.all(np.diff(t) > 0)
        assert np.allclose(np.diff(t), suite.sim.sample_interval, rtol=0, atol=1e-12)


def test_contact_samples_respect_cone(case_runs, suite):
    mu = suite.env.friction_coefficient
    for _, trajectory in case_runs.values():
        for s in trajectory.samples:
            if s.forces is not None:
                assert s.forces.normal >= 0.0
                assert abs(s.forces.friction) <= mu * s.forces.normal + 1e-9
                rx, ry = suite.body.contact_offset(s.state.attitude)
                assert abs(s.state.position[1] + ry) < 1e-9


def test_zero_gravity_flight_speed_is_constant(case_runs):
    for result, trajectory in case_runs.values():
        flight = [s for s in trajectory.samples if s.state.contact_phase is ContactPhase.BALLISTIC]
        assert flight
        for s in flight:
            assert abs(s.state.speed - result.v_h) <= 1e-12 * result.v_h


def test_finite_duration_cases_separate_by_cutoff(case_runs, suite):
    for label in ("#4", "#5"):
        result, _ = case_runs[label]
        assert result.t_h <= suite.case(label).duration + suite.sim.step_size


def test_separation_result_matches_full_run(case_runs, suite):
    for label, cmd in suite.cases:
        assert separation_result(suite.body, suite.env, cmd, suite.motor, suite.sim) == case_runs[label][0]


def test_escape_flagged_for_fast_hop(suite):
    result, trajectory = run_hop(suite.body, suite.env, suite.case("#1"), MotorModel(20.0), suite.sim)
    assert result.v_h > 200.0
    assert trajectory.final_phase is ContactPhase.ESCAPED


def test_landing_and_settling_under_gravity(suite):
    env = Environment(gravity=(0.0, -30.0))
    cmd = MotorCommand(1.0, 2.0, 4.53)
    config = replace(suite.sim, max_time=30.0)
    result, trajectory = run_hop(suite.body, env, cmd, suite.motor, config)
    assert result.t_h < 2.0
    assert trajectory.final_phase is ContactPhase.RESTING
    # settled well before the time limit
    assert trajectory.samples[-1].t < config.max_time - 1.0
    assert trajectory.samples[-1].state.speed < config.settle_speed_threshold
    # never below the ground, up to the 0.015 mm the polar contact corner
    # sits above the rounded rectangle corner
    for s in trajectory.samples:
        low = min(p[1] for p in suite.body.support_points(s.state.attitude))
        assert s.state.position[1] + low > -0.02


def test_calibration_round_trip(suite):
    cmd = suite.case("#2")
    g0 = 3.1
    target = separation_result(suite.body, suite.env, cmd, MotorModel(g0), suite.sim)
    motor = calibrate_motor_gain(target, suite.body, suite.env, cmd, suite.sim)
    assert motor.torque_gain == pytest.approx(g0, rel=1e-3)


def test_calibration_is_monotone(suite):
    cmd = suite.case("#1")
    ref = HopResult.from_components(30.0, 40.0)
    double = HopResult.from_components(60.0, 80.0)
    a = calibrate_motor_gain(ref, suite.body, suite.env, cmd, suite.sim)
    b = calibrate_motor_gain(double, suite.body, suite.env, cmd, suite.sim)
    assert b.torque_gain > a.torque_gain


def test_calibration_failure(suite):
    with pytest.raises(NoConvergence):
        calibrate_motor_gain(HopResult.from_components(0.0, 1e9), suite.body, suite.env, suite.case("#1"),
                             suite.sim, max_steps=3)
    with pytest.raises(ValueError):
        calibrate_motor_gain(HopResult.from_components(0.0, 0.0), suite.body, suite.env, suite.case("#1"))


def test_trajectory_csv(case_runs):
    _, trajectory = case_runs["#4"]
    buf = io.StringIO()
    write_trajectory_csv(trajectory, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == len(trajectory.samples) + 1
    first = lines[1].split(",")
    assert first[7] == "Thrusting" and first[8] != ""
    last = lines[-1].split(",")
    assert last[7] == "Ballistic" and last[8] == "" and last[9] == ""
