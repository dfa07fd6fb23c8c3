"""Hopping-rover simulator for microgravity bodies."""

from .dynamics import MotorModel, contact_step, friction_limit, motor_torque
from .estimation import MarkerSet, PoseObservation, estimate_pose, fit_hop_velocity
from .model import (
    UNBOUNDED,
    ContactForces,
    ContactPhase,
    Environment,
    HopResult,
    MotorCommand,
    RoverBody,
    RoverState,
    Trajectory,
    hop_polar,
)
from .sim import SimConfig, bounce, calibrate_motor_gain, detect_escape, run_hop

__version__ = "0.1.0"

__all__ = [
    "UNBOUNDED",
    "ContactForces",
    "ContactPhase",
    "Environment",
    "HopResult",
    "MarkerSet",
    "MotorCommand",
    "MotorModel",
    "PoseObservation",
    "RoverBody",
    "RoverState",
    "SimConfig",
    "Trajectory",
    "bounce",
    "calibrate_motor_gain",
    "contact_step",
    "detect_escape",
    "estimate_pose",
    "fit_hop_velocity",
    "friction_limit",
    "hop_polar",
    "motor_torque",
    "run_hop",
]
