"""Solar/capacitor power budget and activity gating."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..errors import UnknownActivity
from .thermal import RoverHealth

SOLAR_POWER_1AU = 2.2  # W
DEFAULT_LOADS = {
    "actuators": 2.6,
    "communication": 1.8,
    "camera": 8.0,
    "computer": 0.8,
}


@dataclass(frozen=True)
class PowerBudget:
    solar_power: float = SOLAR_POWER_1AU
    loads: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_LOADS))
    floor_voltage: float = 0.0

    def __post_init__(self):
        if self.solar_power < 0:
            raise ValueError("solar_power must be nonnegative")

    @classmethod
    def at(cls, distance_au: float = 1.0, attitude_factor: float = 1.0, **kwargs) -> PowerBudget:
        """Budget for a given heliocentric distance and panel illumination fraction."""
        if not 0.0 <= attitude_factor <= 1.0:
            raise ValueError("attitude_factor must lie in [0, 1]")
        if not distance_au > 0:
            raise ValueError("distance_au must be positive")
        return cls(SOLAR_POWER_1AU * attitude_factor / distance_au**2, **kwargs)


@dataclass(frozen=True)
class GateDecision:
    permitted: bool
    draw: float = 0.0  # J taken from the capacitors
    activity: str = ""


def usable_energy(health: RoverHealth, floor_voltage: float = 0.0) -> float:
    v = health.capacitor_voltage
    if v <= floor_voltage:
        return 0.0
    return 0.5 * health.effective_capacitance * (v * v - floor_voltage * floor_voltage)


def power_gate(budget: PowerBudget, health: RoverHealth, activity: str, duration: float) -> GateDecision:
    if not duration > 0:
        raise ValueError("duration must be positive")
    try:
        load = budget.loads[activity]
    except KeyError:
        raise UnknownActivity(activity) from None
    deficit = max(0.0, (load - budget.solar_power) * duration)
    if deficit <= usable_energy(health, budget.floor_voltage):
        return GateDecision(True, deficit, activity)
    return GateDecision(False, 0.0, activity)


def discharge(health: RoverHealth, energy: float) -> RoverHealth:
    """Remove ``energy`` joules from the capacitor bank."""
    if energy <= 0.0:
        return health
    c = health.effective_capacitance
    remaining = health.capacitor_energy - energy
    if remaining < -1e-9:
        raise ValueError("discharge exceeds stored energy")
    return replace(health, capacitor_voltage=math.sqrt(max(0.0, 2.0 * remaining / c)))


def charge(health: RoverHealth, power: float, dt: float, max_voltage: float = 4.6) -> RoverHealth:
    """Store surplus solar power, clipped at the rated voltage."""
    c = health.effective_capacitance
    if power <= 0.0 or dt <= 0.0 or c <= 0.0:
        return health
    energy = min(health.capacitor_energy + power * dt, 0.5 * c * max_voltage**2)
    return replace(health, capacitor_voltage=math.sqrt(2.0 * energy / c))
