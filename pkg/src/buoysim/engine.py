"""Fixed-step co-simulation of inventory, dynamics and controller.

The controller runs once per control period; duties are held between ticks
(zero-order hold) while the plant advances at the physics step.  One
telemetry record is emitted per control tick, at t = 0, control_period,
..., duration inclusive.

`SimSession` exposes the tick-by-tick interface the live gateway needs
(command queue, mode switches, resets); `run_scenario` drains a session
headless and attaches per-segment response metrics and the gas
conservation ledger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from buoysim.control import (
    ControlGains,
    ControllerState,
    manual_command,
    map_actuation,
    pid_step,
    sense_depth,
)
from buoysim.gas_inventory import GasInventory, step_inventory, total_buoyant_gas
from buoysim.metrics import ResponseMetrics, compute_metrics, segment_bounds
from buoysim.rng import NoiseStream
from buoysim.scenario import Scenario
from buoysim.telemetry import TelemetryRecord, pick_event
from buoysim.vehicle_dynamics import VehicleState, net_vertical_force, step_dynamics

__all__ = [
    "ELECTROLYSIS_POWER_W",
    "IDLE_POWER_W",
    "MOTOR_POWER_W",
    "RunLedger",
    "SimResult",
    "SimSession",
    "instantaneous_power",
    "run_scenario",
]

# Electronics idle draw plus per-channel full-duty consumption.
IDLE_POWER_W = 0.26
ELECTROLYSIS_POWER_W = 0.75
MOTOR_POWER_W = 1.875


def instantaneous_power(elec_duty: float, vib_duty: float) -> float:
    """Electrical power draw (W) at the given duties."""
    for name, duty in (("elec_duty", elec_duty), ("vib_duty", vib_duty)):
        if not 0.0 <= duty <= 1.0:
            raise ValueError(f"{name} {duty} outside [0, 1]")
    return IDLE_POWER_W + ELECTROLYSIS_POWER_W * elec_duty + MOTOR_POWER_W * vib_duty


@dataclass(slots=True)
class RunLedger:
    """Gas volumes (m^3) moved over a whole run."""

    source: float = 0.0
    escaped: float = 0.0
    released: float = 0.0
    dissolved: float = 0.0
    overflow: float = 0.0
    disturbed: float = 0.0

    @property
    def removed(self) -> float:
        return self.escaped + self.released + self.dissolved + self.overflow + self.disturbed


@dataclass(frozen=True, slots=True)
class SimResult:
    scenario: Scenario
    telemetry: list[TelemetryRecord]
    metrics: list[ResponseMetrics]
    ledger: RunLedger
    conservation_residual: float


class SimSession:
    """Mutable simulation state advanced one control tick at a time.

    Operator commands (live or scripted) are queued and applied at the next
    tick boundary, which keeps replays exact: a headless run with a command
    script is bit-identical to a paced session fed the same commands at the
    same simulated times.
    """

    def __init__(self, scenario: Scenario, seed: int | None = None,
                 script: Sequence[dict[str, Any]] | None = None) -> None:
        scenario.validate()
        self.scenario = scenario
        self.seed = scenario.sensor.seed if seed is None else seed
        self._script = sorted(script or [], key=lambda c: c.get("t", 0.0))
        self.reset()

    def reset(self) -> None:
        scenario = self.scenario
        self.noise = NoiseStream(self.seed)
        depth = min(max(scenario.initial_depth, 0.0), scenario.robot.tank_depth)
        self.state = VehicleState(
            depth=depth,
            velocity=0.0,
            on_bottom=depth >= scenario.robot.tank_depth,
            at_surface=depth <= 0.0,
        )
        self.inventory = scenario.initial_inventory
        self.ctrl = ControllerState()
        self.mode = scenario.mode
        self.gains = scenario.gains
        self.setpoint = depth  # hold position until the schedule takes over
        self.pots = (0.0, 0.0)
        self.tick_index = 0
        self.energy = 0.0
        self.ledger = RunLedger()
        self.last_output = 0.0
        self.last_duties = (0.0, 0.0)
        self.last_measured = depth
        self._events: set[str] = set()
        self._sched_i = 0
        self._manual_i = 0
        self._dist_i = 0
        self._script_i = 0
        self._pending: list[dict[str, Any]] = []
        self._verbose_buffer: list[TelemetryRecord] = []

    # -- command interface -------------------------------------------------

    def queue_command(self, command: dict[str, Any]) -> None:
        """Queue an operator command; it takes effect at the next tick."""
        self._pending.append(command)

    def apply_command(self, command: dict[str, Any]) -> None:
        action = command.get("action")
        if action == "set_mode":
            mode = command["mode"]
            if mode not in ("manual", "auto"):
                raise ValueError(f"unknown mode {mode!r}")
            self.mode = mode
        elif action == "set_target_depth":
            depth = float(command["depth"])
            if not 0.0 <= depth <= self.scenario.robot.tank_depth:
                raise ValueError("target depth outside [0, tank_depth]")
            if depth != self.setpoint:
                self._events.add("setpoint_change")
            self.setpoint = depth
        elif action == "set_gains":
            self.gains = ControlGains(
                kp=float(command["kp"]), ki=float(command["ki"]), kd=float(command["kd"])
            )
        elif action == "set_pots":
            pot_e, pot_m = float(command["pot_e"]), float(command["pot_m"])
            manual_command(pot_e, pot_m)  # range check
            self.pots = (pot_e, pot_m)
        elif action == "inject_disturbance":
            self._inject_disturbance(float(command["volume"]))
        else:
            raise ValueError(f"unknown command action {action!r}")

    def _inject_disturbance(self, volume: float) -> None:
        if volume < 0.0:
            raise ValueError("disturbance volume must be >= 0")
        inv = self.inventory
        from_rel = min(volume, inv.v_releasable)
        from_res = min(volume - from_rel, inv.v_residual)
        self.inventory = GasInventory(
            v_electrode=inv.v_electrode,
            v_releasable=inv.v_releasable - from_rel,
            v_residual=inv.v_residual - from_res,
        )
        self.ledger.disturbed += from_rel + from_res
        self._events.add("disturbance")

    # -- schedules ----------------------------------------------------------

    def _apply_schedules(self, t: float) -> None:
        scenario = self.scenario
        eps = 1e-9
        while (
            self._sched_i < len(scenario.setpoint_schedule)
            and scenario.setpoint_schedule[self._sched_i][0] <= t + eps
        ):
            _, target = scenario.setpoint_schedule[self._sched_i]
            if target != self.setpoint or self.tick_index == 0:
                self._events.add("setpoint_change")
            self.setpoint = target
            self._sched_i += 1
        while (
            self._manual_i < len(scenario.manual_schedule)
            and scenario.manual_schedule[self._manual_i][0] <= t + eps
        ):
            _, pot_e, pot_m = scenario.manual_schedule[self._manual_i]
            self.pots = (pot_e, pot_m)
            self._manual_i += 1
        while (
            self._dist_i < len(scenario.disturbance_schedule)
            and scenario.disturbance_schedule[self._dist_i][0] <= t + eps
        ):
            _, volume = scenario.disturbance_schedule[self._dist_i]
            self._inject_disturbance(volume)
            self._dist_i += 1
        while (
            self._script_i < len(self._script)
            and self._script[self._script_i].get("t", 0.0) <= t + eps
        ):
            self.apply_command(self._script[self._script_i])
            self._script_i += 1

    # -- stepping -----------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.tick_index * self.scenario.control_period

    def finished(self) -> bool:
        return self.tick_index > self.scenario.control_steps()

    def tick(self, verbose: bool = False) -> TelemetryRecord:
        """Run one control tick and return its telemetry record.

        The final tick (t = duration) samples and records but does not
        advance the plant.
        """
        scenario = self.scenario
        t = self.sim_time
        self._apply_schedules(t)
        for command in self._pending:
            self.apply_command(command)
        self._pending.clear()

        measured = sense_depth(self.state.depth, scenario.sensor, self.noise.next_gauss())
        self.last_measured = measured
        if self.mode == "auto":
            self.ctrl, output = pid_step(
                self.ctrl, self.gains, self.setpoint, measured,
                scenario.control_period, scenario.pid_options,
            )
            duties = map_actuation(output)
        else:
            output = 0.0
            duties = manual_command(*self.pots)
        self.last_output = output
        self.last_duties = duties

        record = self._record(t, measured, output, duties, pick_event(self._events))
        self._events.clear()

        if self.tick_index < scenario.control_steps():
            self._advance_physics(t, duties, verbose)
        self.tick_index += 1
        return record

    def _record(
        self,
        t: float,
        measured: float,
        output: float,
        duties: tuple[float, float],
        event: str,
    ) -> TelemetryRecord:
        scenario = self.scenario
        return TelemetryRecord(
            t=t,
            depth=self.state.depth,
            measured_depth=measured,
            setpoint=self.setpoint,
            output=output,
            elec_duty=duties[0],
            vib_duty=duties[1],
            v_electrode=self.inventory.v_electrode,
            v_releasable=self.inventory.v_releasable,
            v_residual=self.inventory.v_residual,
            net_force=net_vertical_force(
                self.state, total_buoyant_gas(self.inventory), scenario.env, scenario.robot
            ),
            power=instantaneous_power(*duties),
            cumulative_energy=self.energy,
            event=event,
        )

    def _advance_physics(self, t: float, duties: tuple[float, float], verbose: bool) -> None:
        scenario = self.scenario
        dt = scenario.physics_dt
        steps = scenario.physics_steps_per_tick()
        elec_duty, vib_duty = duties
        power = instantaneous_power(elec_duty, vib_duty)
        was_bottom = self.state.on_bottom
        was_surface = self.state.at_surface
        for j in range(steps):
            step = step_inventory(self.inventory, elec_duty, vib_duty, dt, scenario.inventory)
            self.inventory = step.inventory
            led = step.ledger
            self.ledger.source += led.source
            self.ledger.escaped += led.escaped
            self.ledger.released += led.released
            self.ledger.dissolved += led.dissolved
            self.ledger.overflow += led.overflow
            if step.overflowed:
                self._events.add("overflow")

            force = net_vertical_force(
                self.state, total_buoyant_gas(self.inventory), scenario.env, scenario.robot
            )
            self.state = step_dynamics(self.state, force, dt, scenario.robot)
            if self.state.on_bottom and not was_bottom:
                self._events.add("bottom_contact")
            if self.state.at_surface and not was_surface:
                self._events.add("surface_contact")
            was_bottom = self.state.on_bottom
            was_surface = self.state.at_surface

            self.energy += power * dt
            if verbose and j < steps - 1:
                self._verbose_buffer.append(
                    self._record(t + (j + 1) * dt, self.last_measured,
                                 self.last_output, duties, "none")
                )

    def drain_verbose(self) -> list[TelemetryRecord]:
        buffered = self._verbose_buffer
        self._verbose_buffer = []
        return buffered


def run_scenario(
    scenario: Scenario,
    seed: int | None = None,
    verbose: bool = False,
    script: Sequence[dict[str, Any]] | None = None,
) -> SimResult:
    """Run a scenario headless and compute per-segment metrics.

    `seed` overrides the sensor seed; `script` is a list of timed operator
    commands ({"t": seconds, "action": ..., ...}) applied at tick
    boundaries, used to reproduce interactive sessions exactly.
    """
    session = SimSession(scenario, seed=seed, script=script)
    records: list[TelemetryRecord] = []
    for _ in range(scenario.control_steps() + 1):
        record = session.tick(verbose=verbose)
        records.append(record)
        if verbose:
            records.extend(session.drain_verbose())
    if verbose:
        records.sort(key=lambda r: r.t)

    metrics = []
    if scenario.mode == "auto":
        for t0, t1, target in segment_bounds(scenario.setpoint_schedule, scenario.duration):
            try:
                metrics.append(compute_metrics(records, t0, t1, target))
            except ValueError:
                continue

    initial = scenario.initial_inventory.total
    final = session.inventory.total
    ledger = session.ledger
    scale = max(initial + ledger.source, 1e-300)
    residual = abs(initial + ledger.source - final - ledger.removed) / scale
    return SimResult(
        scenario=scenario,
        telemetry=records,
        metrics=metrics,
        ledger=ledger,
        conservation_residual=residual,
    )
