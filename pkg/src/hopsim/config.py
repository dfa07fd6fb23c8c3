"""Experiment-suite files: flat ``key = value`` lines grouped under section headers.

Sections: ``[body]``, ``[environment]``, ``[motor]``, ``[sim]``, one
``[case <label>]`` per motor command and optional ``[reference <label>]``
blocks holding published hop results. Numbers accept ``inf`` and simple
fractions such as ``1/30``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .dynamics import MotorModel
from .model import Environment, HopResult, MotorCommand, RoverBody
from .sim import SimConfig


class ConfigError(ValueError):
    pass


BODY_KEYS = ("mass", "half_width", "half_height", "contact_offset_distance", "contact_offset_angle", "moment_of_inertia")
ENV_KEYS = ("gravity_x", "gravity_y", "friction_coefficient", "escape_velocity")
SIM_KEYS = ("step_size", "max_time", "restitution", "settle_speed_threshold", "sample_interval")
CASE_KEYS = ("duty_ratio", "duration", "supply_voltage")
REFERENCE_KEYS = ("v_hx", "v_hy", "v_h", "theta_h", "t_h")
MOTOR_KEYS = ("torque_gain",)


@dataclass
class ExperimentSuite:
    cases: list[tuple[str, MotorCommand]] = field(default_factory=list)
    body: RoverBody = field(default_factory=RoverBody)
    env: Environment = field(default_factory=Environment)
    sim: SimConfig = field(default_factory=SimConfig)
    motor: Optional[MotorModel] = None
    reference_results: dict[str, HopResult] = field(default_factory=dict)

    def __post_init__(self):
        labels = [label for label, _ in self.cases]
        if len(set(labels)) != len(labels):
            raise ConfigError("case labels must be unique")
        extra = set(self.reference_results) - set(labels)
        if extra:
            raise ConfigError(f"reference labels without a case: {sorted(extra)}")

    def case(self, label: str) -> MotorCommand:
        for name, cmd in self.cases:
            if name == label:
                return cmd
        raise KeyError(label)


def parse_number(text: str) -> float:
    text = text.strip()
    if text.lower() in ("inf", "infinity", "unbounded"):
        return float("inf")
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _section(parser: configparser.ConfigParser, name: str, allowed: tuple[str, ...]) -> dict[str, float]:
    if not parser.has_section(name):
        return {}
    values = {}
    for key, raw in parser.items(name):
        if key not in allowed:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        try:
            values[key] = parse_number(raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"[{name}] {key}: cannot parse {raw!r} as a number") from None
    return values


def _build(cls, section: str, kwargs: dict):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def parse_suite(text: str, source: str = "<config>") -> ExperimentSuite:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=(";",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    known = {"body", "environment", "motor", "sim"}
    for name in parser.sections():
        if name not in known and not name.startswith(("case ", "reference ")):
            raise ConfigError(f"unknown section [{name}]")

    body = _build(RoverBody, "body", _section(parser, "body", BODY_KEYS))
    env_vals = _section(parser, "environment", ENV_KEYS)
    gravity = (env_vals.pop("gravity_x", 0.0), env_vals.pop("gravity_y", 0.0))
    env = _build(Environment, "environment", dict(gravity=gravity, **env_vals))
    sim = _build(SimConfig, "sim", _section(parser, "sim", SIM_KEYS))
    motor_vals = _section(parser, "motor", MOTOR_KEYS)
    motor = _build(MotorModel, "motor", motor_vals) if motor_vals else None

    cases = []
    refs = {}
    for name in parser.sections():
        if name.startswith("case "):
            label = name[len("case "):].strip()
            vals = _section(parser, name, CASE_KEYS)
            missing = {"duty_ratio", "supply_voltage"} - set(vals)
            if missing:
                raise ConfigError(f"[{name}] missing key(s) {sorted(missing)}")
            cases.append((label, _build(MotorCommand, name, vals)))
        elif name.startswith("reference "):
            label = name[len("reference "):].strip()
            vals = _section(parser, name, REFERENCE_KEYS)
            if "v_hx" not in vals or "v_hy" not in vals:
                raise ConfigError(f"[{name}] v_hx and v_hy are required")
            computed = HopResult.from_components(vals["v_hx"], vals["v_hy"])
            refs[label] = HopResult(
                vals["v_hx"],
                vals["v_hy"],
                vals.get("v_h", computed.v_h),
                vals.get("theta_h", computed.theta_h),
                vals.get("t_h"),
            )
    return ExperimentSuite(cases, body, env, sim, motor, refs)


def load_suite(path: str | os.PathLike) -> ExperimentSuite:
    path = Path(path)
    suite = parse_suite(path.read_text(), str(path))
    sidecar = gain_sidecar(path)
    if sidecar.exists():
        gain = parse_suite(sidecar.read_text(), str(sidecar)).motor
        if gain is not None:
            suite.motor = gain
    return suite


def gain_sidecar(path: str | os.PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".gain")


def write_gain_sidecar(path: str | os.PathLike, motor: MotorModel) -> Path:
    sidecar = gain_sidecar(path)
    sidecar.write_text(f"[motor]\ntorque_gain = {motor.torque_gain!r}\n")
    return sidecar


def bundled_config(name: str = "jamic.cfg") -> Path:
    return Path(str(resources.files("hopsim") / "data" / name))
