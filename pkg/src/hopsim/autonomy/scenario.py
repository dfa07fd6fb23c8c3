"""Replay of line-oriented event scripts through the autonomy automata.

A script line looks like ``t=3600 event=ambient temp=95``. Recognised events:

    ambient   temp=<degC>                      set the surrounding temperature
    solar     power=<W>                        set the available solar power
    tick                                       advance time only
    image     id=<id> size=<bytes> [score=<s>] grade a new picture
    request   activity=<name> duration=<s>     ask the power gate
    hop       duration=<s>                     shorthand for an actuator request
    downlink  window=<s> [bandwidth=<bit/s>]   plan a transmission

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

from ..errors import UnknownActivity
from .images import DEFAULT_BANDWIDTH, ImageRecord, pre_shutdown_save, select_images
from .power import PowerBudget, charge, discharge, power_gate, usable_energy
from .thermal import CpuState, RoverHealth, ThermalConfig, capacitors_unusable, near_limit, thermal_step

LOG_HEADER = ("t", "subsystem", "event", "decision", "detail")
FLASH_CAPACITY = 2 * 1024 * 1024  # bytes
MAX_THERMAL_STEP = 60.0  # s


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    t: float
    name: str
    params: dict[str, str]
    line: int = 0


def parse_line(text: str, line_no: int = 0) -> Event | None:
    text = text.strip()
    if not text or text.startswith("#"):
        return None
    fields = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or not key or not value:
            raise ScenarioError(f"line {line_no}: expected key=value, got {token!r}")
        fields[key] = value
    if "t" not in fields or "event" not in fields:
        raise ScenarioError(f"line {line_no}: both t= and event= are required")
    try:
        t = float(fields.pop("t"))
    except ValueError:
        raise ScenarioError(f"line {line_no}: bad time {fields.get('t')!r}") from None
    return Event(t, fields.pop("event"), fields, line_no)


def parse_scenario(lines: Iterable[str]) -> list[Event]:
    events = []
    for i, text in enumerate(lines, start=1):
        ev = parse_line(text, i)
        if ev is None:
            continue
        if events and ev.t < events[-1].t:
            raise ScenarioError(f"line {i}: time goes backwards")
        events.append(ev)
    return events


@dataclass
class Rover:
    """Mutable holder for the automata a scenario drives."""

    health: RoverHealth = field(default_factory=RoverHealth)
    budget: PowerBudget = field(default_factory=PowerBudget)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    ambient: float = 25.0
    time: float = 0.0
    ram: list[ImageRecord] = field(default_factory=list)
    flash: list = field(default_factory=list)
    flash_capacity: int = FLASH_CAPACITY
    saved_this_excursion: bool = False
    log: list[tuple] = field(default_factory=list)

    def record(self, t, subsystem, event, decision, detail=""):
        self.log.append((t, subsystem, event, decision, detail))

    def advance(self, t: float) -> None:
        while self.time < t:
            dt = min(MAX_THERMAL_STEP, t - self.time)
            before = self.health.cpu_state
            self.health = thermal_step(self.health, self.ambient, dt, self.thermal)
            self.time = t if dt == t - self.time else self.time + dt
            temp = self.health.device_temperature
            if self.health.cpu_state is not before:
                self.record(self.time, "thermal", "temperature", self.health.cpu_state.value, f"T={temp:.2f}")
            if self.health.cpu_state is CpuState.RUNNING:
                surplus = self.budget.solar_power - self.budget.loads.get("computer", 0.0)
                self.health = charge(self.health, surplus, dt)
                if near_limit(temp, self.thermal):
                    if not self.saved_this_excursion:
                        self._save()
                        self.saved_this_excursion = True
                else:
                    self.saved_this_excursion = False

    def _save(self) -> None:
        ids = pre_shutdown_save(self.ram, self.flash_capacity - self._flash_used())
        if ids:
            chosen = set(ids)
            self.flash.extend(r for r in self.ram if r.id in chosen)
            self.ram = [r for r in self.ram if r.id not in chosen]
        self.record(self.time, "memory", "pre_shutdown_save", "Persisted", "ids=" + ";".join(map(str, ids)))

    def _flash_used(self) -> int:
        return sum(r.compressed_size for r in self.flash)

    def handle(self, ev: Event) -> None:
        self.advance(ev.t)
        p = ev.params
        try:
            if ev.name == "ambient":
                self.ambient = float(p["temp"])
            elif ev.name == "solar":
                self.budget = replace(self.budget, solar_power=float(p["power"]))
            elif ev.name == "tick":
                pass
            elif ev.name == "image":
                self._image(ev.t, p["id"], int(p["size"]), p.get("score"))
            elif ev.name in ("request", "hop"):
                activity = "actuators" if ev.name == "hop" else p["activity"]
                self._request(ev.t, ev.name, activity, float(p["duration"]))
            elif ev.name == "downlink":
                self._downlink(ev.t, float(p["window"]), float(p.get("bandwidth", DEFAULT_BANDWIDTH)))
            else:
                raise ScenarioError(f"line {ev.line}: unknown event {ev.name!r}")
        except KeyError as exc:
            raise ScenarioError(f"line {ev.line}: missing parameter {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"line {ev.line}: {exc}") from None

    def _image(self, t, image_id, size, score) -> None:
        rec = ImageRecord.evaluate(image_id, size, None if score is None else float(score))
        if rec.stored:
            self.ram.append(rec)
            self.record(t, "camera", "image", "Stored", f"id={image_id} priority={rec.priority:g}")
        else:
            self.record(t, "camera", "image", "Abandoned", f"id={image_id}")

    def _request(self, t, event, activity, duration) -> None:
        if self.health.cpu_state is CpuState.SHUTDOWN:
            self.record(t, "power", event, "Denied", f"activity={activity} cpu shutdown")
            return
        try:
            decision = power_gate(self.budget, self.health, activity, duration)
        except UnknownActivity:
            raise ScenarioError(f"unknown activity {activity!r}") from None
        if decision.permitted:
            self.health = discharge(self.health, decision.draw)
            self.record(t, "power", event, "Permitted", f"activity={activity} draw={decision.draw:.6g}J")
        else:
            why = "capacitor unusable" if capacitors_unusable(self.health) else "insufficient energy"
            available = usable_energy(self.health, self.budget.floor_voltage)
            self.record(t, "power", event, "Denied", f"activity={activity} {why} available={available:.6g}J")

    def _downlink(self, t, window, bandwidth) -> None:
        plan = select_images(self.flash + self.ram, bandwidth, window)
        detail = ";".join(f"{e.id}:{e.bits}{'*' if e.partial else ''}" for e in plan)
        self.record(t, "comm", "downlink", "Planned", detail)
        sent = {e.id for e in plan if not e.partial}
        self.flash = [r for r in self.flash if r.id not in sent]
        self.ram = [r for r in self.ram if r.id not in sent]


def run_scenario(events: Iterable[Event], rover: Rover | None = None) -> Rover:
    rover = rover or Rover()
    for ev in events:
        rover.handle(ev)
    return rover


def write_log(rows: Iterable[tuple], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for t, *rest in rows:
        writer.writerow([repr(float(t)), *rest])
