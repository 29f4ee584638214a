"""Scenario description and its JSON file format.

A scenario bundles everything one simulation run needs: plant parameters,
controller gains, sensor model, mode, schedules and timing.  Files are
UTF-8 JSON with a `schema_version` field; unknown keys are rejected so
typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Any

from buoysim.bubble_physics import FluidEnv
from buoysim.control import ControlGains, PidOptions, SensorModel
from buoysim.gas_inventory import GasInventory, InventoryParams
from buoysim.vehicle_dynamics import RobotParams

__all__ = [
    "SCHEMA_VERSION",
    "Scenario",
    "ScenarioValidationError",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
]

SCHEMA_VERSION = 1

MODES = ("manual", "auto")


class ScenarioValidationError(ValueError):
    """Validation failure carrying the list of offending fields."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))


@dataclass(frozen=True, slots=True)
class Scenario:
    label: str = "unnamed"
    env: FluidEnv = field(default_factory=FluidEnv)
    robot: RobotParams = field(default_factory=RobotParams)
    inventory: InventoryParams = field(default_factory=InventoryParams)
    gains: ControlGains = field(default_factory=ControlGains)
    pid_options: PidOptions = field(default_factory=PidOptions)
    sensor: SensorModel = field(default_factory=SensorModel)
    mode: str = "auto"
    # (time s, target depth m); the entry with the largest time <= t is active.
    setpoint_schedule: tuple[tuple[float, float], ...] = ()
    # (time s, pot_e counts, pot_m counts)
    manual_schedule: tuple[tuple[float, float, float], ...] = ()
    # (time s, gas volume m^3 removed from the canopy at that tick)
    disturbance_schedule: tuple[tuple[float, float], ...] = ()
    initial_depth: float = 0.0
    initial_inventory: GasInventory = field(default_factory=GasInventory)
    duration: float = 60.0
    physics_dt: float = 1e-3
    control_period: float = 0.1

    def validate(self) -> None:
        """Raise ScenarioValidationError listing every offending field."""
        problems: list[str] = []
        if self.mode not in MODES:
            problems.append(f"mode: {self.mode!r} not one of {MODES}")
        if self.duration <= 0.0:
            problems.append("duration: must be > 0")
        if self.physics_dt <= 0.0:
            problems.append("physics_dt: must be > 0")
        if self.control_period <= 0.0:
            problems.append("control_period: must be > 0")
        elif self.physics_dt > 0.0:
            ratio = self.control_period / self.physics_dt
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                problems.append("control_period: must be an integer multiple of physics_dt")
        if not 0.0 <= self.initial_depth <= self.robot.tank_depth:
            problems.append("initial_depth: outside [0, tank_depth]")
        for name, schedule in (
            ("setpoint_schedule", self.setpoint_schedule),
            ("manual_schedule", self.manual_schedule),
            ("disturbance_schedule", self.disturbance_schedule),
        ):
            times = [entry[0] for entry in schedule]
            if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
                problems.append(f"{name}: times must be sorted ascending")
            if any(t < 0.0 for t in times):
                problems.append(f"{name}: times must be >= 0")
        for i, (_, target) in enumerate(self.setpoint_schedule):
            if not 0.0 <= target <= self.robot.tank_depth:
                problems.append(f"setpoint_schedule[{i}]: target outside [0, tank_depth]")
        for i, (_, pot_e, pot_m) in enumerate(self.manual_schedule):
            if not (0.0 <= pot_e <= 255.0 and 0.0 <= pot_m <= 255.0):
                problems.append(f"manual_schedule[{i}]: counts outside [0, 255]")
        for i, (_, volume) in enumerate(self.disturbance_schedule):
            if volume < 0.0:
                problems.append(f"disturbance_schedule[{i}]: volume must be >= 0")
        if self.mode == "auto" and not self.setpoint_schedule:
            problems.append("setpoint_schedule: auto mode needs at least one entry")
        if self.initial_inventory.canopy > self.inventory.canopy_capacity * (1 + 1e-9):
            problems.append("initial_inventory: canopy gas exceeds canopy_capacity")
        if problems:
            raise ScenarioValidationError(problems)

    def control_steps(self) -> int:
        return round(self.duration / self.control_period)

    def physics_steps_per_tick(self) -> int:
        return round(self.control_period / self.physics_dt)


def _section_to_dict(obj: Any) -> dict[str, Any]:
    return {f.name: getattr(obj, f.name) for f in dc_fields(obj)}


def _section_from_dict(cls: type, data: Any, section: str, problems: list[str]) -> Any:
    if not isinstance(data, dict):
        problems.append(f"{section}: expected an object")
        return cls()
    known = {f.name for f in dc_fields(cls)}
    unknown = set(data) - known
    if unknown:
        problems.append(f"{section}: unknown fields {sorted(unknown)}")
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"{section}: {exc}")
        return cls()


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "label": scenario.label,
        "env": _section_to_dict(scenario.env),
        "robot": _section_to_dict(scenario.robot),
        "inventory": _section_to_dict(scenario.inventory),
        "gains": _section_to_dict(scenario.gains),
        "pid_options": _section_to_dict(scenario.pid_options),
        "sensor": _section_to_dict(scenario.sensor),
        "mode": scenario.mode,
        "setpoint_schedule": [list(entry) for entry in scenario.setpoint_schedule],
        "manual_schedule": [list(entry) for entry in scenario.manual_schedule],
        "disturbance_schedule": [list(entry) for entry in scenario.disturbance_schedule],
        "initial_depth": scenario.initial_depth,
        "initial_inventory": _section_to_dict(scenario.initial_inventory),
        "duration": scenario.duration,
        "physics_dt": scenario.physics_dt,
        "control_period": scenario.control_period,
    }


_SECTION_TYPES = {
    "env": FluidEnv,
    "robot": RobotParams,
    "inventory": InventoryParams,
    "gains": ControlGains,
    "pid_options": PidOptions,
    "sensor": SensorModel,
    "initial_inventory": GasInventory,
}

_SCALAR_KEYS = ("label", "mode", "initial_depth", "duration", "physics_dt", "control_period")
_SCHEDULE_KEYS = ("setpoint_schedule", "manual_schedule", "disturbance_schedule")


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    """Build and validate a Scenario from parsed JSON."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ScenarioValidationError(["document: expected a JSON object"])

    allowed = {"schema_version", *_SCALAR_KEYS, *_SCHEDULE_KEYS, *_SECTION_TYPES}
    unknown = set(data) - allowed
    if unknown:
        problems.append(f"document: unknown fields {sorted(unknown)}")

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        problems.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    kwargs: dict[str, Any] = {}
    for key, cls in _SECTION_TYPES.items():
        if key in data:
            kwargs[key] = _section_from_dict(cls, data[key], key, problems)
    for key in _SCALAR_KEYS:
        if key in data:
            kwargs[key] = data[key]
    for key in _SCHEDULE_KEYS:
        if key in data:
            entries = data[key]
            width = 3 if key == "manual_schedule" else 2
            if not isinstance(entries, list) or any(
                not isinstance(e, (list, tuple)) or len(e) != width for e in entries
            ):
                problems.append(f"{key}: expected a list of {width}-element entries")
            else:
                kwargs[key] = tuple(tuple(float(x) for x in e) for e in entries)

    if problems:
        raise ScenarioValidationError(problems)
    try:
        scenario = Scenario(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioValidationError([str(exc)]) from exc
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError([f"document: not valid JSON ({exc})"]) from exc
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8"
    )
