import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from hopsim.dynamics import (
    ContactMode,
    ContactSolution,
    MotorModel,
    Separation,
    contact_step,
    friction_limit,
    motor_torque,
)
from hopsim.errors import NoSeparation
from hopsim.model import ContactPhase, Environment, MotorCommand, RoverBody, RoverState
from hopsim.sim import SimConfig, _Pivot, run_hop


def test_friction_limit_zero_gravity_is_mu_F():
    assert friction_limit(1.0, 0.591, 0.0, 1.0) == 1.0


def test_friction_limit_wheeled_case():
    assert friction_limit(0.5, 2.0, 9800.0, 0.0) == pytest.approx(9.8, rel=1e-15)


def test_friction_limit_microgravity_matches_exact_expression():
    # exact oracle: mu * (m * g[m/s^2] + F)
    got = friction_limit(1.0, 0.591, 0.098, 1.0)
    assert got == pytest.approx(1.0 * (0.591 * 0.098e-3 + 1.0), rel=1e-15)
    assert (got - 1.0) / 1.0 == pytest.approx(0.591 * 0.098e-3, rel=1e-9)


@pytest.mark.parametrize("args", [(-1, 1, 0, 0), (1, -1, 0, 0), (1, 1, -1, 0), (1, 1, 0, -1), (1, 0, 0, 1)])
def test_friction_limit_rejects_bad_inputs(args):
    with pytest.raises(ValueError):
        friction_limit(*args)


@given(
    st.floats(1e-3, 2.0),
    st.floats(1e-3, 10.0),
    st.floats(0.0, 1e4),
    st.floats(1e-6, 100.0),
)
def test_friction_limit_relative_gap_is_mg_over_F(mu, m, g, F):
    gap = friction_limit(mu, m, g, F) / (mu * F) - 1.0
    assert gap == pytest.approx(m * g / 1000.0 / F, rel=1e-9, abs=1e-15)


def test_motor_torque_examples():
    motor = MotorModel(10.0)
    assert motor_torque(MotorCommand(1.0, math.inf, 4.53), motor, 5.0) == pytest.approx(45.3)
    assert motor_torque(MotorCommand(0.5, 0.5, 4.05), motor, 0.6) == 0.0
    assert motor_torque(MotorCommand(0.25, math.inf, 4.80), motor, 1.0) == pytest.approx(12.0)


def test_motor_torque_cutoff_is_exclusive():
    motor = MotorModel(10.0)
    cmd = MotorCommand(1.0, 0.5, 2.0)
    assert motor_torque(cmd, motor, 0.4999) == 20.0
    assert motor_torque(cmd, motor, 0.5) == 0.0
    with pytest.raises(ValueError):
        motor_torque(cmd, motor, -1.0)
    with pytest.raises(ValueError):
        MotorModel(0.0)


def _resting(body=RoverBody()):
    rx, ry = body.contact_offset(0.0)
    return RoverState((-rx, -ry), (0.0, 0.0), 0.0, 0.0, ContactPhase.RESTING)


def test_equilibrium_without_torque_or_gravity():
    sol = contact_step(_resting(), RoverBody(), Environment(), 0.0)
    assert isinstance(sol, ContactSolution)
    assert sol.acceleration == (0.0, 0.0)
    assert sol.angular_acceleration == 0.0
    assert sol.forces.normal == 0.0 and sol.forces.friction == 0.0


def test_static_weight_support():
    body = RoverBody()
    sol = contact_step(_resting(body), body, Environment(gravity=(0.0, -9800.0)), 0.0)
    assert sol.forces.normal == pytest.approx(body.mass * 9.8, rel=1e-12)
    assert sol.forces.friction == 0.0
    assert sol.acceleration == (0.0, 0.0) and sol.angular_acceleration == 0.0


def test_positive_torque_tips_forward():
    sol = contact_step(_resting(), RoverBody(), Environment(), 5.0)
    assert sol.angular_acceleration < 0  # clockwise
    assert sol.acceleration[0] > 0 and sol.acceleration[1] > 0


def _oracle(state, body, env, torque):
    """Independent dense solve of the pivot equations in kg, mm, s units."""
    m, inertia, mu = body.mass, body.moment_of_inertia, env.friction_coefficient
    gx, gy = env.gravity
    rx, ry = body.contact_offset(state.attitude)
    w = state.angular_velocity
    tau = -torque * 1000.0
    # unknowns ax, ay, alpha, f, N
    a = np.array(
        [
            [m, 0, 0, -1, 0],
            [0, m, 0, 0, -1],
            [0, 0, inertia, ry, -rx],
            [1, 0, -ry, 0, 0],
            [0, 1, rx, 0, 0],
        ],
        dtype=float,
    )
    b = np.array([m * gx, m * gy, tau, w * w * rx, w * w * ry])
    x = np.linalg.solve(a, b)
    if x[4] < 0:
        return None
    if abs(x[3]) <= mu * x[4]:
        return x, "stick"
    d = -np.sign(x[3])
    # past this point the slip problem has no unique solution
    assume(1.0 / m + (rx * rx + mu * d * rx * ry) / inertia > 0)
    # friction tied to the normal force; tangential constraint dropped
    a2 = np.array(
        [
            [m, 0, 0, mu * d],
            [0, m, 0, -1],
            [0, 0, inertia, -rx - ry * mu * d],
            [0, 1, rx, 0],
        ],
        dtype=float,
    )
    b2 = np.array([m * gx, m * gy, tau, w * w * ry])
    y = np.linalg.solve(a2, b2)
    if y[3] < 0:
        return None
    return np.array([y[0], y[1], y[2], -mu * d * y[3], y[3]]), "slip"


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-0.5, -1e-6),  # tipped forward so the face does not interfere
    st.floats(-3.0, 0.0),
    st.floats(0.0, 50.0),
    st.floats(0.0, 2.0),
    st.floats(-500.0, 0.0),
    st.floats(-100.0, 100.0),
)
def test_contact_step_matches_dense_oracle(attitude, omega, torque, mu, gy, gx):
    body = RoverBody()
    env = Environment(gravity=(gx, gy), friction_coefficient=mu)
    rx, ry = body.contact_offset(attitude)
    # sticking corner: velocity of the contact point is zero
    state = RoverState((-rx, -ry), (omega * ry, -omega * rx), attitude, omega, ContactPhase.THRUSTING)
    expected = _oracle(state, body, env, torque)
    got = contact_step(state, body, env, torque)
    if expected is None:
        assert isinstance(got, Separation)
        return
    x, mode = expected
    assert isinstance(got, ContactSolution)
    assert got.mode.value == mode
    scale = 1.0 + np.max(np.abs(x))
    assert got.acceleration[0] == pytest.approx(x[0], abs=1e-9 * scale)
    assert got.acceleration[1] == pytest.approx(x[1], abs=1e-9 * scale)
    assert got.angular_acceleration == pytest.approx(x[2], abs=1e-9 * scale)
    assert got.forces.friction == pytest.approx(x[3] / 1000.0, abs=1e-12 * scale)
    assert got.forces.normal == pytest.approx(x[4] / 1000.0, abs=1e-12 * scale)
    # Coulomb cone and unilateral contact
    assert got.forces.normal >= 0.0
    assert abs(got.forces.friction) <= mu * got.forces.normal + 1e-9


def test_stick_at_cone_boundary_resolves_to_stick():
    body = RoverBody()
    state = _resting(body)
    sol = contact_step(state, body, Environment(friction_coefficient=10.0), 5.0)
    ratio = abs(sol.forces.friction) / sol.forces.normal
    tie = contact_step(state, body, Environment(friction_coefficient=ratio), 5.0)
    assert tie.mode is ContactMode.STICK


def test_sliding_corner_gets_kinetic_friction():
    body = RoverBody()
    rx, ry = body.contact_offset(-0.05)
    state = RoverState((-rx, -ry), (-3.0, 0.0), -0.05, 0.0, ContactPhase.THRUSTING)
    sol = contact_step(state, body, Environment(friction_coefficient=0.7), 5.0)
    assert sol.mode is ContactMode.SLIP
    assert sol.forces.friction == pytest.approx(0.7 * sol.forces.normal)


def test_zero_torque_resting_under_gravity_never_leaves():
    body = RoverBody()
    env = Environment(gravity=(0.0, -0.098))
    with pytest.raises(NoSeparation):
        run_hop(body, env, MotorCommand(0.0), MotorModel(1.0), SimConfig(max_time=1.0))
    pivot = _Pivot(body, env, MotorCommand(0.0), MotorModel(1.0))
    s = pivot.initial()
    for k in range(2000):
        sol = pivot.evaluate(s, k * 1e-4)
        s = pivot.advance(s, sol, 1e-4)
    assert s == pivot.initial()


@pytest.mark.parametrize("label", ["#1", "#3"])
def test_momentum_bookkeeping_converges(suite, label):
    def residual(h):
        pivot = _Pivot(suite.body, suite.env, suite.case(label), suite.motor)
        s = pivot.initial()
        jx = jy = 0.0
        n = int(round(0.5 / h))
        for k in range(n):
            sol = pivot.evaluate(s, k * h)
            jx += sol[4] * h
            jy += sol[5] * h
            s = pivot.advance(s, sol, h)
        m = suite.body.mass
        return np.array([m * s[3] - jx, m * s[4] - jy]), math.hypot(m * s[3], m * s[4])

    r1, p = residual(1e-4)
    r2, _ = residual(5e-5)
    assert np.linalg.norm(r1) < 1e-4 * p
    # first-order scheme: halving the step halves the residual
    ratio = np.linalg.norm(r1) / np.linalg.norm(r2)
    assert 1.8 < ratio < 2.2
