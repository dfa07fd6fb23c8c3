"""Domain types shared across the simulator, estimator and CLI.

Units follow the drop-tower tables: millimeters, seconds, kilograms, with
angles in degrees at every external interface and radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

UNBOUNDED = math.inf


class ContactPhase(Enum):
    RESTING = "Resting"
    THRUSTING = "Thrusting"
    BALLISTIC = "Ballistic"
    ESCAPED = "Escaped"


@dataclass(frozen=True)
class RoverBody:
    """Planar rigid body seen from the side.

    The contact corner is given in polar form relative to the center of
    mass. The body x-axis points to the rear of the rover, so a corner at
    219.8 deg lies below and ahead of the center of mass in the world frame
    and tipping over it carries the rover toward +x.
    """

    mass: float = 0.591
    half_width: float = 120.0
    half_height: float = 100.0
    contact_offset_distance: float = 156.2
    contact_offset_angle: float = 219.8
    moment_of_inertia: Optional[float] = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not (self.half_width > 0 and self.half_height > 0):
            raise ValueError("half_width and half_height must be positive")
        if not self.contact_offset_distance > 0:
            raise ValueError("contact_offset_distance must be positive")
        if not 0.0 <= self.contact_offset_angle < 360.0:
            raise ValueError("contact_offset_angle must lie in [0, 360)")
        if self.moment_of_inertia is None:
            # uniform-density rectangle about its center
            inertia = self.mass * (self.half_width**2 + self.half_height**2) / 3.0
            object.__setattr__(self, "moment_of_inertia", inertia)
        elif not self.moment_of_inertia > 0:
            raise ValueError("moment_of_inertia must be positive")

    def contact_offset(self, attitude: float = 0.0) -> tuple[float, float]:
        """World-frame vector from the center of mass to the contact corner."""
        a = math.radians(self.contact_offset_angle)
        bx = -self.contact_offset_distance * math.cos(a)
        by = self.contact_offset_distance * math.sin(a)
        return _rotate(bx, by, attitude)

    def support_points(self, attitude: float = 0.0) -> list[tuple[float, float]]:
        """Corners that can touch the ground, as world offsets from the center of mass."""
        w, h = self.half_width, self.half_height
        pts = [_rotate(x, y, attitude) for x, y in ((w, h), (-w, h), (-w, -h), (w, -h))]
        pts.append(self.contact_offset(attitude))
        return pts


def _rotate(x: float, y: float, angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * x - s * y, s * x + c * y)


@dataclass(frozen=True)
class MotorCommand:
    """PWM history of one torquer firing."""

    duty_ratio: float
    duration: float = UNBOUNDED
    supply_voltage: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.duty_ratio <= 1.0:
            raise ValueError(f"duty_ratio must lie in [0, 1], got {self.duty_ratio}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive or unbounded, got {self.duration}")
        if not self.supply_voltage >= 0:
            raise ValueError(f"supply_voltage must be nonnegative, got {self.supply_voltage}")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.duration)


@dataclass(frozen=True)
class Environment:
    gravity: tuple[float, float] = (0.0, 0.0)  # mm/s^2
    friction_coefficient: float = 1.0
    escape_velocity: float = 200.0  # mm/s

    def __post_init__(self):
        if not self.friction_coefficient >= 0:
            raise ValueError("friction_coefficient must be nonnegative")
        if not self.escape_velocity >= 0:
            raise ValueError("escape_velocity must be nonnegative")
        object.__setattr__(self, "gravity", (float(self.gravity[0]), float(self.gravity[1])))


@dataclass(frozen=True)
class RoverState:
    position: tuple[float, float]
    velocity: tuple[float, float]
    attitude: float
    angular_velocity: float
    contact_phase: ContactPhase = ContactPhase.RESTING

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


def hop_polar(v_hx: float, v_hy: float) -> tuple[float, float]:
    """Return hop speed and direction, the latter measured from the vertical in degrees."""
    v_h = math.hypot(v_hx, v_hy)
    if v_h == 0.0:
        return 0.0, 0.0
    return v_h, math.degrees(math.atan2(v_hx, v_hy))


@dataclass(frozen=True)
class HopResult:
    v_hx: float
    v_hy: float
    v_h: float
    theta_h: float
    t_h: Optional[float] = None

    @classmethod
    def from_components(cls, v_hx: float, v_hy: float, t_h: Optional[float] = None) -> HopResult:
        v_h, theta_h = hop_polar(v_hx, v_hy)
        return cls(v_hx, v_hy, v_h, theta_h, t_h)

    def as_row(self) -> dict[str, Optional[float]]:
        return {
            "v_hx": self.v_hx,
            "v_hy": self.v_hy,
            "v_h": self.v_h,
            "theta_h": self.theta_h,
            "t_h": self.t_h,
        }


@dataclass(frozen=True)
class ContactForces:
    normal: float  # N
    friction: float  # N
    applied_torque: float  # N*mm


@dataclass(frozen=True)
class Sample:
    t: float
    state: RoverState
    forces: Optional[ContactForces] = None


@dataclass
class Trajectory:
    sample_interval: float
    samples: list[Sample] = field(default_factory=list)
    final_phase: ContactPhase = ContactPhase.BALLISTIC

    def times(self) -> list[float]:
        return [s.t for s in self.samples]

    def positions(self) -> list[tuple[float, float]]:
        return [s.state.position for s in self.samples]
