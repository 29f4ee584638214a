"""Depth sensing model and the discrete PID depth controller.

The controller runs at the control tick (10 Hz by default), works on the
depth error expressed in millimetres, and emits a dimensionless output in
[-255, +255]: positive output drives the electrolysis channel (gain lift),
negative output drives the vibration motor (shed lift).  A small deadband
around zero keeps the actuators quiet near equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ACTUATION_DEADBAND",
    "ControlGains",
    "ControllerState",
    "OUTPUT_LIMIT",
    "PidOptions",
    "SensorModel",
    "manual_command",
    "map_actuation",
    "pid_step",
    "sense_depth",
]

OUTPUT_LIMIT = 255.0
ACTUATION_DEADBAND = 10.0  # counts; prevents duty chatter near equilibrium


@dataclass(frozen=True, slots=True)
class SensorModel:
    """Behavioural pressure-sensor model: Gaussian noise plus quantization."""

    noise_sigma: float = 0.5e-3  # m
    quantization: float = 1e-3  # m, 0 disables rounding
    seed: int = 0

    def __post_init__(self) -> None:
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.quantization < 0.0:
            raise ValueError("quantization must be >= 0")


@dataclass(frozen=True, slots=True)
class ControlGains:
    """PID gains acting on depth error in millimetres."""

    kp: float = 2.5  # counts per mm
    ki: float = 0.9  # counts per (mm s)
    kd: float = 0.1  # counts per (mm/s)

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0")


@dataclass(frozen=True, slots=True)
class PidOptions:
    """Controller variants kept configurable because the hardware loop's
    exact windup and derivative handling is unknown."""

    anti_windup: bool = True
    derivative_on_error: bool = False  # default: derivative on measurement
    integral_limit: float | None = None  # mm s; None means OUTPUT_LIMIT / ki


DEFAULT_PID_OPTIONS = PidOptions()


@dataclass(frozen=True, slots=True)
class ControllerState:
    """Controller memory between ticks.  Millimetre units internally."""

    integral_accum: float = 0.0  # mm s
    prev_measurement: float | None = None  # mm
    prev_setpoint: float | None = None  # mm, for the derivative-on-error variant
    last_output: float = 0.0


def sense_depth(true_depth: float, sensor: SensorModel, noise_draw: float) -> float:
    """Measured depth: true depth plus scaled noise, rounded to the sensor
    grid and clamped at the surface."""
    value = true_depth + sensor.noise_sigma * noise_draw
    if sensor.quantization > 0.0:
        value = math.floor(value / sensor.quantization + 0.5) * sensor.quantization
    return max(0.0, value)


def _integral_limit(gains: ControlGains, options: PidOptions) -> float:
    # Bound the integral so its term alone can never exceed the output
    # range; with ki = 0 the accumulator is pinned at zero so a later gain
    # change does not release stale windup.
    if options.integral_limit is not None:
        return options.integral_limit
    if gains.ki > 0.0:
        return OUTPUT_LIMIT / gains.ki
    return 0.0


def pid_step(
    state: ControllerState,
    gains: ControlGains,
    setpoint: float,
    measured: float,
    dt: float,
    options: PidOptions = DEFAULT_PID_OPTIONS,
) -> tuple[ControllerState, float]:
    """One controller tick; returns the updated state and the output.

    Error is (measured - setpoint) in mm: positive means too deep, which
    needs lift, which is positive output.  The derivative acts on the
    measurement by default so setpoint steps do not kick the output; it
    enters with the sign that opposes the measured motion.  With
    anti-windup enabled the integral is frozen whenever the output is
    saturated and the error would push it further into saturation, and is
    additionally clamped so the integral term alone stays inside the
    output range.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")

    error_mm = (measured - setpoint) * 1000.0
    measured_mm = measured * 1000.0
    setpoint_mm = setpoint * 1000.0

    if state.prev_measurement is None:
        derivative = 0.0
    elif options.derivative_on_error:
        prev_sp = state.prev_setpoint if state.prev_setpoint is not None else setpoint_mm
        prev_error = state.prev_measurement - prev_sp
        derivative = (error_mm - prev_error) / dt
    else:
        derivative = (measured_mm - state.prev_measurement) / dt

    limit = _integral_limit(gains, options)
    integral_new = state.integral_accum + error_mm * dt
    integral_new = max(-limit, min(limit, integral_new))

    d_term = gains.kd * derivative
    raw = gains.kp * error_mm + gains.ki * integral_new + d_term
    integral = integral_new
    if options.anti_windup and abs(raw) > OUTPUT_LIMIT and raw * error_mm > 0.0:
        # Pushing further into saturation: keep the previous accumulator.
        integral = max(-limit, min(limit, state.integral_accum))
        raw = gains.kp * error_mm + gains.ki * integral + d_term
    if not options.anti_windup:
        integral = state.integral_accum + error_mm * dt

    output = max(-OUTPUT_LIMIT, min(OUTPUT_LIMIT, raw))
    new_state = ControllerState(
        integral_accum=integral,
        prev_measurement=measured_mm,
        prev_setpoint=setpoint_mm,
        last_output=output,
    )
    return new_state, output


def map_actuation(output: float, deadband: float = ACTUATION_DEADBAND) -> tuple[float, float]:
    """Map controller output counts to (elec_duty, vib_duty).

    One channel at a time: positive output electrolyses, negative output
    vibrates, anything inside the deadband leaves both off.
    """
    if abs(output) > OUTPUT_LIMIT:
        raise ValueError(f"output {output} outside [-255, 255]")
    if output > deadband:
        return output / OUTPUT_LIMIT, 0.0
    if output < -deadband:
        return 0.0, -output / OUTPUT_LIMIT
    return 0.0, 0.0


def manual_command(pot_e: float, pot_m: float) -> tuple[float, float]:
    """Map operator potentiometer counts (0..255) to duties.

    Unlike the automatic mapping, both channels may be active at once.
    """
    for name, value in (("pot_e", pot_e), ("pot_m", pot_m)):
        if not 0.0 <= value <= 255.0:
            raise ValueError(f"{name} {value} outside [0, 255]")
    return pot_e / 255.0, pot_m / 255.0
