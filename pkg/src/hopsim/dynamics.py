"""Contact-phase physics: Coulomb friction limit, PWM torquer, corner pivot.

Internally forces are kg*mm/s^2 (millinewtons) so that masses in kg and
lengths in mm compose without conversion; everything crossing the module
boundary is newtons or N*mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .model import ContactForces, MotorCommand, RoverBody, RoverState, Environment

# 1 N = 1000 kg*mm/s^2 and 1 N*mm = 1000 kg*mm^2/s^2
MILLI = 1000.0


@dataclass(frozen=True)
class MotorModel:
    """Quasi-static torquer: torque = gain * duty * voltage while the command lasts."""

    torque_gain: float  # N*mm per volt

    def __post_init__(self):
        if not self.torque_gain > 0:
            raise ValueError(f"torque_gain must be positive, got {self.torque_gain}")


def friction_limit(mu: float, m: float, g: float, F: float) -> float:
    """Maximum traction in newtons for a body of mass ``m`` (kg) under gravity
    ``g`` (mm/s^2) pressed down by an extra force ``F`` (N)."""
    for name, value in (("mu", mu), ("m", m), ("g", g), ("F", F)):
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")
    if m == 0:
        raise ValueError("m must be positive")
    return mu * (m * g / MILLI + F)


def motor_torque(cmd: MotorCommand, motor: MotorModel, t: float) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t < cmd.duration:
        return motor.torque_gain * cmd.duty_ratio * cmd.supply_voltage
    return 0.0


class ContactMode(Enum):
    STICK = "stick"
    SLIP = "slip"


@dataclass(frozen=True)
class ContactSolution:
    acceleration: tuple[float, float]  # mm/s^2
    angular_acceleration: float  # rad/s^2
    forces: ContactForces
    mode: ContactMode


@dataclass(frozen=True)
class Separation:
    """The unilateral constraint would have to pull: the body leaves the surface."""

    normal: float  # N, the (negative) normal force the constraint asked for


def solve_contact(
    rx: float,
    ry: float,
    omega: float,
    slide_velocity: float,
    m: float,
    inertia: float,
    gx: float,
    gy: float,
    mu: float,
    torque_world: float,
    face: bool = False,
) -> tuple:
    """Pivot constraint solve on plain floats.

    ``(rx, ry)`` is contact minus center of mass, ``torque_world`` is the
    counterclockwise couple in kg*mm^2/s^2. Returns
    ``(separated, ax, ay, alpha, f, N, slipping)`` with forces in kg*mm/s^2.
    With ``face`` set the body sits level on its bottom face, which blocks
    any rotation that would lift the corner.
    """
    inv_m = 1.0 / m
    w2 = omega * omega
    tau_i = torque_world / inertia
    slipping = slide_velocity != 0.0
    if not slipping:
        # contact point acceleration zero in both directions
        a11 = inv_m + ry * ry / inertia
        a12 = -rx * ry / inertia
        a22 = inv_m + rx * rx / inertia
        b1 = -gx + ry * tau_i + w2 * rx
        b2 = -gy - rx * tau_i + w2 * ry
        det = a11 * a22 - a12 * a12
        f = (b1 * a22 - a12 * b2) / det
        N = (a11 * b2 - a12 * b1) / det
        if N < 0.0:
            return (True, 0.0, 0.0, 0.0, 0.0, N, False)
        if face and tau_i + (rx * N - ry * f) / inertia > 0.0:
            return _face_support(slide_velocity, m, gx, gy, mu)
        if abs(f) <= mu * N:
            alpha = tau_i + (rx * N - ry * f) / inertia
            return (False, f * inv_m + gx, N * inv_m + gy, alpha, f, N, False)
        # slide opposite to the friction that sticking would need
        direction = -1.0 if f > 0 else 1.0
    else:
        direction = 1.0 if slide_velocity > 0 else -1.0
    # friction f = -mu * direction * N; only the normal constraint remains
    coeff = inv_m + (rx * rx + mu * direction * rx * ry) / inertia
    rhs = -gy - rx * tau_i + w2 * ry
    if coeff <= 0.0:
        # frictional indeterminacy; resolve as the frictionless limit
        coeff = inv_m + rx * rx / inertia
        mu_eff = 0.0
    else:
        mu_eff = mu
    N = rhs / coeff
    if N < 0.0:
        return (True, 0.0, 0.0, 0.0, 0.0, N, True)
    f = -mu_eff * direction * N
    alpha = tau_i + (rx * N - ry * f) / inertia
    return (False, f * inv_m + gx, N * inv_m + gy, alpha, f, N, True)


def _face_support(slide_velocity, m, gx, gy, mu) -> tuple:
    # flat on the ground: no rotation, the face carries the weight
    N = -m * gy
    if N < 0.0:
        return (True, 0.0, 0.0, 0.0, 0.0, N, False)
    f = 0.0 - m * gx
    slipping = slide_velocity != 0.0 or abs(f) > mu * N
    if slipping:
        direction = slide_velocity if slide_velocity != 0.0 else -f
        f = -math.copysign(mu * N, direction)
    return (False, f / m + gx, 0.0, 0.0, f, N, slipping)


SLIDE_TOLERANCE = 1e-9  # mm/s
FACE_TOLERANCE = 1e-12  # rad


def on_face(attitude: float, angular_velocity: float) -> bool:
    """True while the rover sits level, not tipping onto its contact corner."""
    return attitude >= -FACE_TOLERANCE and angular_velocity >= 0.0


def contact_step(
    state: RoverState, body: RoverBody, env: Environment, torque: float
) -> Union[ContactSolution, Separation]:
    """Accelerations of a body pivoting on its contact corner.

    ``torque`` is the torquer reaction in N*mm; positive values tip the body
    forward (clockwise in the x-right, y-up world frame).
    """
    rx, ry = body.contact_offset(state.attitude)
    vx, vy = state.velocity
    w = state.angular_velocity
    slide = vx - w * ry
    if abs(slide) < SLIDE_TOLERANCE:
        slide = 0.0
    separated, ax, ay, alpha, f, N, slipping = solve_contact(
        rx, ry, w, slide, body.mass, body.moment_of_inertia,
        env.gravity[0], env.gravity[1], env.friction_coefficient, -torque * MILLI,
        on_face(state.attitude, w),
    )
    if separated:
        return Separation(normal=N / MILLI)
    forces = ContactForces(normal=N / MILLI, friction=f / MILLI, applied_torque=torque)
    mode = ContactMode.SLIP if slipping else ContactMode.STICK
    return ContactSolution((ax, ay), alpha, forces, mode)
