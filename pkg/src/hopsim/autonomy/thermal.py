"""Temperature-gated CPU power and capacitor wear."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class CpuState(Enum):
    RUNNING = "Running"
    SHUTDOWN = "Shutdown"


@dataclass(frozen=True)
class ThermalConfig:
    time_constant: float = 1800.0  # s, MLI-lagged response
    min_temperature: float = -50.0
    max_temperature: float = 80.0
    hysteresis: float = 5.0
    degradation_temperature: float = 130.0
    episode_duration: float = 3600.0  # s above threshold that counts as one overheated day
    episodes_to_fail: int = 2


@dataclass(frozen=True)
class RoverHealth:
    device_temperature: float = 25.0
    cpu_state: CpuState = CpuState.RUNNING
    capacitor_voltage: float = 4.6
    capacitor_capacitance: float = 20.0
    capacitor_degradation: float = 0.0
    overheat_exposure: int = 0
    # bookkeeping for the episode in progress
    overheat_seconds: float = 0.0
    episode_base: float = 0.0

    @property
    def effective_capacitance(self) -> float:
        return self.capacitor_capacitance * (1.0 - self.capacitor_degradation)

    @property
    def capacitor_energy(self) -> float:
        return 0.5 * self.effective_capacitance * self.capacitor_voltage**2


def update_cpu_state(state: CpuState, temperature: float, config: ThermalConfig = ThermalConfig()) -> CpuState:
    if temperature > config.max_temperature or temperature < config.min_temperature:
        return CpuState.SHUTDOWN
    low = config.min_temperature + config.hysteresis
    high = config.max_temperature - config.hysteresis
    if low <= temperature <= high:
        return CpuState.RUNNING
    return state


def near_limit(temperature: float, config: ThermalConfig = ThermalConfig()) -> bool:
    """True inside the hysteresis band just short of a working-range bound."""
    return (
        config.max_temperature - config.hysteresis < temperature <= config.max_temperature
        or config.min_temperature <= temperature < config.min_temperature + config.hysteresis
    )


def _time_above(t0: float, ambient: float, dt: float, tau: float, threshold: float) -> float:
    """Seconds within a relaxation step spent above ``threshold``."""
    start_above = t0 > threshold
    end_above = ambient > threshold
    if start_above and end_above:
        return dt
    if not start_above and not end_above:
        return 0.0
    if ambient == threshold:
        return dt  # approaches from above without crossing
    # exponential relaxation crosses the threshold exactly once
    crossing = tau * math.log((t0 - ambient) / (threshold - ambient))
    crossing = min(max(crossing, 0.0), dt)
    return dt - crossing if end_above else crossing


def thermal_step(
    health: RoverHealth, ambient: float, dt: float, config: ThermalConfig = ThermalConfig()
) -> RoverHealth:
    if not dt > 0:
        raise ValueError("dt must be positive")
    t0 = health.device_temperature
    decay = math.exp(-dt / config.time_constant)
    t1 = ambient + (t0 - ambient) * decay
    cpu = update_cpu_state(health.cpu_state, t1, config)

    above = _time_above(t0, ambient, dt, config.time_constant, config.degradation_temperature)
    seconds = health.overheat_seconds
    base = health.episode_base
    exposure = health.overheat_exposure
    degradation = health.capacitor_degradation
    if above > 0.0:
        if seconds == 0.0:
            base = degradation
        before = seconds
        seconds += above
        share = min(seconds, config.episode_duration) / (config.episode_duration * config.episodes_to_fail)
        degradation = max(degradation, min(1.0, base + share))
        if before < config.episode_duration <= seconds:
            exposure += 1
    if t1 <= config.degradation_temperature:
        # episode over; the next one starts from the wear accumulated so far
        seconds = 0.0
        base = degradation
    return replace(
        health,
        device_temperature=t1,
        cpu_state=cpu,
        capacitor_degradation=degradation,
        overheat_exposure=exposure,
        overheat_seconds=seconds,
        episode_base=base,
    )


def capacitors_unusable(health: RoverHealth) -> bool:
    return health.capacitor_degradation >= 1.0
