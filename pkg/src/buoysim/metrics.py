"""Step-response metrics over telemetry segments.

Each setpoint change opens a new segment; metrics are computed per segment
from the true-depth trace.  Millimetre units for errors, seconds for
times.  Settling may legitimately never happen, which is reported as
`settling_time=None` (a distinguished value, not an error).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from buoysim.telemetry import TelemetryRecord

__all__ = [
    "ResponseMetrics",
    "compute_metrics",
    "segment_bounds",
    "write_metrics_json",
]

SETTLING_BAND_FRACTION = 0.05
RISE_LOW = 0.1
RISE_HIGH = 0.9
# Trailing fraction of a segment used for the steady-state error estimate.
STEADY_STATE_WINDOW = 0.25


@dataclass(frozen=True, slots=True)
class ResponseMetrics:
    target: float  # m
    t_start: float
    t_end: float
    overshoot: float  # mm past the target in the approach direction
    rise_time_10_90: float | None  # s, None when the 90% level is never reached
    settling_time_5pct: float | None  # s from segment start, None when not attained
    steady_state_error: float  # mm, |mean error| over the trailing window
    itae: float  # mm s^2
    transition_energy: float  # J, from segment start until settled (whole segment if never)


def _interp_crossing(t0: float, v0: float, t1: float, v1: float, level: float) -> float:
    if v1 == v0:
        return t1
    frac = (level - v0) / (v1 - v0)
    return t0 + frac * (t1 - t0)


def compute_metrics(
    telemetry: Sequence[TelemetryRecord],
    t_start: float,
    t_end: float,
    target: float,
) -> ResponseMetrics:
    """Metrics for the records with t_start <= t <= t_end against `target`."""
    rows = [r for r in telemetry if t_start <= r.t <= t_end]
    if len(rows) < 2:
        raise ValueError("segment must contain at least two telemetry records")

    times = [r.t for r in rows]
    depths = [r.depth for r in rows]
    initial_error = depths[0] - target  # signed, m
    step = abs(initial_error)
    approach = -1.0 if initial_error > 0 else 1.0  # direction of depth change toward target

    # Overshoot: worst excursion past the target along the approach direction.
    if initial_error == 0.0:
        overshoot_m = max(abs(d - target) for d in depths)
    elif approach < 0:  # depth decreasing toward target
        overshoot_m = max(0.0, target - min(depths))
    else:
        overshoot_m = max(0.0, max(depths) - target)

    # Rise time: 10% -> 90% closure of the initial error, first crossings.
    rise: float | None = None
    if step > 0.0:
        t_low = t_high = None
        for i in range(1, len(rows)):
            c_prev = 1.0 - (depths[i - 1] - target) / initial_error
            c_here = 1.0 - (depths[i] - target) / initial_error
            if t_low is None and c_prev < RISE_LOW <= c_here:
                t_low = _interp_crossing(times[i - 1], c_prev, times[i], c_here, RISE_LOW)
            if t_high is None and c_prev < RISE_HIGH <= c_here:
                t_high = _interp_crossing(times[i - 1], c_prev, times[i], c_here, RISE_HIGH)
                break
        if t_low is not None and t_high is not None:
            rise = t_high - t_low

    # Settling: last entry into the 5%-of-step band that is never left.
    settling: float | None = None
    if step > 0.0:
        band = SETTLING_BAND_FRACTION * step
        inside = [abs(d - target) <= band for d in depths]
        if inside[-1]:
            last_outside = None
            for i in range(len(rows) - 1, -1, -1):
                if not inside[i]:
                    last_outside = i
                    break
            if last_outside is None:
                settling = 0.0
            else:
                i = last_outside
                e0 = abs(depths[i] - target)
                e1 = abs(depths[i + 1] - target)
                t_cross = _interp_crossing(times[i], e0, times[i + 1], e1, band)
                settling = t_cross - t_start
    elif step == 0.0:
        settling = 0.0

    # Steady-state error over the trailing window.
    window_start = t_end - STEADY_STATE_WINDOW * (t_end - t_start)
    tail = [d - target for r, d in zip(rows, depths) if r.t >= window_start]
    steady = abs(math.fsum(tail) / len(tail)) * 1000.0 if tail else 0.0

    # ITAE with time measured from segment start.
    itae = 0.0
    for i in range(1, len(rows)):
        dt = times[i] - times[i - 1]
        t_rel = times[i] - t_start
        itae += t_rel * abs(depths[i] - target) * 1000.0 * dt

    # Energy from segment start until settled (whole segment when never).
    e_start = rows[0].cumulative_energy
    if settling is not None:
        t_settle_abs = t_start + settling
        e_end = next(
            (r.cumulative_energy for r in rows if r.t >= t_settle_abs),
            rows[-1].cumulative_energy,
        )
    else:
        e_end = rows[-1].cumulative_energy
    transition_energy = e_end - e_start

    return ResponseMetrics(
        target=target,
        t_start=t_start,
        t_end=t_end,
        overshoot=overshoot_m * 1000.0,
        rise_time_10_90=rise,
        settling_time_5pct=settling,
        steady_state_error=steady,
        itae=itae,
        transition_energy=transition_energy,
    )


def segment_bounds(
    setpoint_schedule: Sequence[tuple[float, float]],
    duration: float,
) -> list[tuple[float, float, float]]:
    """(t_start, t_end, target) per schedule entry, clipped to the run."""
    segments = []
    entries = [e for e in setpoint_schedule if e[0] < duration]
    for i, (t0, target) in enumerate(entries):
        t1 = entries[i + 1][0] if i + 1 < len(entries) else duration
        segments.append((t0, t1, target))
    return segments


def write_metrics_json(metrics: Sequence[ResponseMetrics], path: str | Path, extra: dict | None = None) -> None:
    doc = {
        "schema_version": 1,
        "segments": [
            {
                "target": m.target,
                "t_start": m.t_start,
                "t_end": m.t_end,
                "overshoot_mm": m.overshoot,
                "rise_time_10_90_s": m.rise_time_10_90,
                "settling_time_5pct_s": m.settling_time_5pct,
                "steady_state_error_mm": m.steady_state_error,
                "itae_mm_s2": m.itae,
                "transition_energy_j": m.transition_energy,
            }
            for m in metrics
        ],
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
