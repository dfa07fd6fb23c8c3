"""Hop lifecycle integration: thrust on the contact corner, separation,
ballistic flight, bounces and settling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Optional

from .dynamics import MILLI, SLIDE_TOLERANCE, MotorModel, motor_torque, on_face, solve_contact
from .errors import NoConvergence, NoSeparation
from .model import (
    ContactForces,
    ContactPhase,
    Environment,
    HopResult,
    MotorCommand,
    RoverBody,
    RoverState,
    Sample,
    Trajectory,
)

CSV_HEADER = ("t", "x", "y", "attitude", "vx", "vy", "omega", "phase", "N", "f")

# bisection depth for event instants: 2**-4 of a step
_REFINE_ITERATIONS = 4
_PENETRATION_TOLERANCE = 1e-9  # mm


@dataclass(frozen=True)
class SimConfig:
    step_size: float = 1e-4
    max_time: float = 3.0
    restitution: float = 0.1
    settle_speed_threshold: float = 1.0
    sample_interval: float = 1.0 / 30.0

    def __post_init__(self):
        if not 0 < self.step_size <= self.sample_interval:
            raise ValueError("step_size must satisfy 0 < step_size <= sample_interval")
        if not 0.0 <= self.restitution <= 1.0:
            raise ValueError("restitution must lie in [0, 1]")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if not self.settle_speed_threshold >= 0:
            raise ValueError("settle_speed_threshold must be nonnegative")


def detect_escape(result: HopResult, env: Environment) -> bool:
    return result.v_h > env.escape_velocity


class _Pivot:
    """Fixed-step semi-implicit integrator for the body pivoting on its corner.

    State tuples are ``(x, y, attitude, vx, vy, omega, anchor_x)`` where
    ``anchor_x`` is the ground position of the contact corner.
    """

    def __init__(self, body: RoverBody, env: Environment, cmd: MotorCommand, motor: MotorModel):
        self.cmd = cmd
        self.motor = motor
        self.m = body.mass
        self.inertia = body.moment_of_inertia
        self.gx, self.gy = env.gravity
        self.mu = env.friction_coefficient
        self.bx, self.by = body.contact_offset(0.0)

    def initial(self) -> tuple:
        # contact corner at the origin, attitude zero, at rest
        return (-self.bx, -self.by, 0.0, 0.0, 0.0, 0.0, 0.0)

    def offset(self, th: float) -> tuple[float, float]:
        c, s = math.cos(th), math.sin(th)
        return c * self.bx - s * self.by, s * self.bx + c * self.by

    def torque(self, t: float) -> float:
        return motor_torque(self.cmd, self.motor, t)

    def evaluate(self, s: tuple, t: float) -> tuple:
        x, y, th, vx, vy, w, _ = s
        rx, ry = self.offset(th)
        slide = vx - w * ry
        if abs(slide) < SLIDE_TOLERANCE:
            slide = 0.0
        tau = self.torque(t)
        sol = solve_contact(
            rx, ry, w, slide, self.m, self.inertia, self.gx, self.gy, self.mu, -tau * MILLI,
            on_face(th, w),
        )
        return sol + (tau,)

    def advance(self, s: tuple, sol: tuple, h: float) -> tuple:
        x, y, th, vx, vy, w, anchor = s
        _, ax, ay, alpha, f, _, slipping, _ = sol
        vx += ax * h
        vy += ay * h
        w += alpha * h
        x += vx * h
        y += vy * h
        th += w * h
        if th > 0.0:
            # the bottom face lands flat; plastic impact
            th = w = 0.0
        rx, ry = self.offset(th)
        # keep the corner on the ground
        y = -ry
        vy = -w * rx
        stick = not slipping
        if slipping and f != 0.0:
            direction = -1.0 if f > 0 else 1.0
            if (vx - w * ry) * direction <= 0.0:
                stick = True  # sliding reversed within the step
                anchor = x + rx
        if stick:
            x = anchor - rx
            vx = w * ry
        else:
            anchor = x + rx
        return (x, y, th, vx, vy, w, anchor)

    def state(self, s: tuple, phase: ContactPhase) -> RoverState:
        return RoverState((s[0], s[1]), (s[3], s[4]), s[2], s[5], phase)

    @staticmethod
    def forces(sol: tuple) -> ContactForces:
        return ContactForces(normal=sol[5] / MILLI, friction=sol[4] / MILLI, applied_torque=sol[7])


def _separate(pivot: _Pivot, config: SimConfig, trajectory: Optional[Trajectory] = None):
    """Integrate the contact phase; return ``(t_h, state_tuple)`` at separation."""
    h = config.step_size
    dt_sample = config.sample_interval
    n_steps = int(math.floor(config.max_time / h + 1e-9))
    s = pivot.initial()
    prev = prev_sol = None
    next_sample = 0
    for k in range(n_steps + 1):
        t = k * h
        sol = pivot.evaluate(s, t)
        if sol[0]:
            if prev is None:
                return t, s
            t_prev = (k - 1) * h
            lo, hi = 0.0, h
            s_hi = s
            for _ in range(_REFINE_ITERATIONS):
                mid = 0.5 * (lo + hi)
                s_mid = pivot.advance(prev, prev_sol, mid)
                if pivot.evaluate(s_mid, t_prev + mid)[0]:
                    hi, s_hi = mid, s_mid
                else:
                    lo = mid
            return t_prev + hi, s_hi
        if trajectory is not None:
            phase = ContactPhase.THRUSTING if sol[7] > 0 else ContactPhase.RESTING
            t_next = t + h
            while next_sample * dt_sample < t_next:
                ts = next_sample * dt_sample
                if ts > config.max_time:
                    break
                sub = s if ts <= t else pivot.advance(s, sol, ts - t)
                trajectory.samples.append(Sample(ts, pivot.state(sub, phase), pivot.forces(sol)))
                next_sample += 1
        prev, prev_sol = s, sol
        s = pivot.advance(s, sol, h)
    raise NoSeparation(f"body still on the surface after {config.max_time} s")


def _ballistic(seg: tuple, t: float, g: tuple[float, float]) -> tuple:
    t0, x, y, th, vx, vy, w = seg
    tau = t - t0
    return (
        x + vx * tau + 0.5 * g[0] * tau * tau,
        y + vy * tau + 0.5 * g[1] * tau * tau,
        th + w * tau,
        vx + g[0] * tau,
        vy + g[1] * tau,
        w,
    )


def _lowest_point(body: RoverBody, q: tuple) -> tuple[float, tuple[float, float]]:
    pts = body.support_points(q[2])
    r = min(pts, key=lambda p: p[1])
    return q[1] + r[1], r


def bounce(
    state: RoverState, body: RoverBody, env: Environment, restitution: float
) -> RoverState:
    """Impulsive impact at the lowest support point.

    Newton restitution on the normal contact velocity with Coulomb-bounded
    tangential impulse. If the frictional impulse would add kinetic energy
    the frictionless impulse is used instead.
    """
    if not 0.0 <= restitution <= 1.0:
        raise ValueError("restitution must lie in [0, 1]")
    m, inertia = body.mass, body.moment_of_inertia
    mu = env.friction_coefficient
    rx, ry = min(body.support_points(state.attitude), key=lambda p: p[1])
    vx, vy = state.velocity
    w = state.angular_velocity
    vpx = vx - w * ry
    vpy = vy + w * rx
    if vpy >= 0.0:
        return state
    k11 = 1.0 / m + ry * ry / inertia
    k12 = -rx * ry / inertia
    k22 = 1.0 / m + rx * rx / inertia
    target_n = -restitution * vpy

    def apply(jt: float, jn: float) -> tuple[float, float, float]:
        return vx + jt / m, vy + jn / m, w + (rx * jn - ry * jt) / inertia

    def energy(ux: float, uy: float, om: float) -> float:
        return 0.5 * m * (ux * ux + uy * uy) + 0.5 * inertia * om * om

    e0 = energy(vx, vy, w)
    candidates = []
    det = k11 * k22 - k12 * k12
    d1, d2 = -vpx, target_n - vpy
    jt = (d1 * k22 - k12 * d2) / det
    jn = (k11 * d2 - k12 * d1) / det
    if jn >= 0.0 and abs(jt) <= mu * jn:
        candidates.append((jt, jn))
    else:
        sign = 1.0 if jt > 0 else -1.0
        denom = k22 + k12 * mu * sign
        if denom > 0.0:
            jn_s = (target_n - vpy) / denom
            if jn_s >= 0.0:
                candidates.append((mu * sign * jn_s, jn_s))
    candidates.append((0.0, (target_n - vpy) / k22))
    for jt, jn in candidates:
        post = apply(jt, jn)
        if energy(*post) <= e0:
            break
    return RoverState(state.position, (post[0], post[1]), state.attitude, post[2], ContactPhase.BALLISTIC)


def _fly(
    body: RoverBody,
    env: Environment,
    cmd: MotorCommand,
    config: SimConfig,
    t_sep: float,
    q: tuple,
    trajectory: Trajectory,
) -> ContactPhase:
    """Propagate from separation to the end of the run; return the final phase."""
    g = env.gravity
    h = config.step_size
    dt_sample = config.sample_interval
    next_sample = int(math.ceil(t_sep / dt_sample - 1e-12))
    while next_sample * dt_sample < t_sep:
        next_sample += 1
    seg = (t_sep,) + tuple(q[:6])
    t = t_sep
    y_low, _ = _lowest_point(body, q)
    last_impact = -math.inf

    def phase_at(ts: float) -> ContactPhase:
        if ts - last_impact > 2.0 * h:
            return ContactPhase.BALLISTIC
        return ContactPhase.THRUSTING if ts < cmd.duration else ContactPhase.RESTING

    def emit_until(t_end: float):
        nonlocal next_sample
        while True:
            ts = next_sample * dt_sample
            if ts > t_end or ts > config.max_time:
                return
            b = _ballistic(seg, ts, g)
            st = RoverState((b[0], b[1]), (b[3], b[4]), b[2], b[5], phase_at(ts))
            trajectory.samples.append(Sample(ts, st, None))
            next_sample += 1

    while t < config.max_time:
        t_next = min(t + h, config.max_time)
        b = _ballistic(seg, t_next, g)
        y_next, _ = _lowest_point(body, b)
        if y_next < -_PENETRATION_TOLERANCE and y_next < y_low:
            # impacts closer than two steps apart mean sustained contact:
            # resolve them once per step as plastic collisions
            sustained = t - last_impact <= 2.0 * h
            if sustained:
                lo = t_next
            else:
                lo, hi = t, t_next
                for _ in range(_REFINE_ITERATIONS + 20):
                    mid = 0.5 * (lo + hi)
                    if _lowest_point(body, _ballistic(seg, mid, g))[0] < 0.0:
                        hi = mid
                    else:
                        lo = mid
            emit_until(lo)
            b = _ballistic(seg, lo, g)
            st = RoverState((b[0], b[1]), (b[3], b[4]), b[2], b[5], ContactPhase.BALLISTIC)
            st = bounce(st, body, env, 0.0 if sustained else config.restitution)
            depth, _ = _lowest_point(body, b)
            seg = (lo, b[0], b[1] - min(depth, 0.0), b[2], st.velocity[0], st.velocity[1], st.angular_velocity)
            t = lo
            last_impact = lo
            y_low = 0.0
            motor_off = lo >= cmd.duration
            spin_speed = abs(st.angular_velocity) * math.hypot(body.half_width, body.half_height)
            if motor_off and st.speed + spin_speed < config.settle_speed_threshold:
                return ContactPhase.RESTING
            continue
        emit_until(t_next)
        t, y_low = t_next, y_next
    return phase_at(t)


def run_hop(
    body: RoverBody,
    env: Environment,
    cmd: MotorCommand,
    motor: MotorModel,
    config: SimConfig = SimConfig(),
) -> tuple[HopResult, Trajectory]:
    trajectory = Trajectory(sample_interval=config.sample_interval)
    pivot = _Pivot(body, env, cmd, motor)
    t_h, q = _separate(pivot, config, trajectory)
    result = HopResult.from_components(q[3], q[4], t_h)
    if detect_escape(result, env):
        trajectory.final_phase = ContactPhase.ESCAPED
        return result, trajectory
    trajectory.final_phase = _fly(body, env, cmd, config, t_h, q, trajectory)
    return result, trajectory


def separation_result(
    body: RoverBody,
    env: Environment,
    cmd: MotorCommand,
    motor: MotorModel,
    config: SimConfig = SimConfig(),
) -> HopResult:
    """Hop result without recording a trajectory or propagating the flight."""
    t_h, q = _separate(_Pivot(body, env, cmd, motor), config)
    return HopResult.from_components(q[3], q[4], t_h)


def calibrate_motor_gain(
    reference: HopResult,
    body: RoverBody,
    env: Environment,
    cmd: MotorCommand,
    config: SimConfig = SimConfig(),
    rel_tol: float = 1e-6,
    max_steps: int = 60,
) -> MotorModel:
    """Find the torque gain reproducing ``reference.v_h`` by bisection.

    Hop speed is nondecreasing in the gain; a gain that fails to lift the
    body off counts as zero speed.
    """
    target = reference.v_h
    if not target > 0:
        raise ValueError("reference hop speed must be positive")

    def speed(gain: float) -> float:
        try:
            return separation_result(body, env, cmd, MotorModel(gain), config).v_h
        except NoSeparation:
            return 0.0

    lo, hi = 0.0, 1.0
    for _ in range(max_steps):
        if speed(hi) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NoConvergence(f"no gain up to {hi} reaches v_h = {target}")
    for _ in range(max_steps):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if speed(mid) >= target:
            hi = mid
        else:
            lo = mid
    return MotorModel(hi)


def write_trajectory_csv(trajectory: Trajectory, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sample in trajectory.samples:
        st = sample.state
        n = f = ""
        if sample.forces is not None:
            n, f = repr(sample.forces.normal), repr(sample.forces.friction)
        writer.writerow(
            [
                repr(sample.t),
                repr(st.position[0]),
                repr(st.position[1]),
                repr(st.attitude),
                repr(st.velocity[0]),
                repr(st.velocity[1]),
                repr(st.angular_velocity),
                st.contact_phase.value,
                n,
                f,
            ]
        )
