"""Onboard autonomy automata: thermal gating, power, image triage, sun sensing, localization."""

from .images import ImageRecord, PlanEntry, pre_shutdown_save, select_images
from .localize import Asteroid, Localization, localize
from .power import GateDecision, PowerBudget, power_gate
from .sun import SunObservation, sun_direction
from .thermal import CpuState, RoverHealth, ThermalConfig, thermal_step

__all__ = [
    "Asteroid",
    "CpuState",
    "GateDecision",
    "ImageRecord",
    "Localization",
    "PlanEntry",
    "PowerBudget",
    "RoverHealth",
    "SunObservation",
    "ThermalConfig",
    "localize",
    "power_gate",
    "pre_shutdown_save",
    "select_images",
    "sun_direction",
    "thermal_step",
]
