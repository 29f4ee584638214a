"""Telemetry records and their CSV serialization.

One record per control tick (or per physics step in verbose mode).  The
column order is fixed and floats are written with 9 significant digits, so
a repeated run of the same seeded scenario produces a byte-identical file.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "CSV_COLUMNS",
    "EVENT_PRIORITY",
    "TelemetryRecord",
    "format_csv",
    "pick_event",
    "read_csv",
    "write_csv",
]

# Highest priority first; a record carries the single most significant
# event that occurred since the previous record.
EVENT_PRIORITY = (
    "disturbance",
    "overflow",
    "bottom_contact",
    "surface_contact",
    "setpoint_change",
    "none",
)

CSV_COLUMNS = (
    "t",
    "depth",
    "measured_depth",
    "setpoint",
    "output",
    "elec_duty",
    "vib_duty",
    "v_electrode",
    "v_releasable",
    "v_residual",
    "net_force",
    "power",
    "cumulative_energy",
    "event",
)


@dataclass(frozen=True, slots=True)
class TelemetryRecord:
    t: float
    depth: float
    measured_depth: float
    setpoint: float
    output: float
    elec_duty: float
    vib_duty: float
    v_electrode: float
    v_releasable: float
    v_residual: float
    net_force: float
    power: float
    cumulative_energy: float
    event: str = "none"


def pick_event(events: Iterable[str]) -> str:
    """Reduce a set of simultaneous events to the most significant one."""
    seen = set(events)
    for name in EVENT_PRIORITY:
        if name in seen:
            return name
    return "none"


def _fmt(value: float) -> str:
    return format(value, ".9g")


def format_csv(records: Sequence[TelemetryRecord]) -> str:
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        out.write(
            ",".join(
                (
                    _fmt(r.t),
                    _fmt(r.depth),
                    _fmt(r.measured_depth),
                    _fmt(r.setpoint),
                    _fmt(r.output),
                    _fmt(r.elec_duty),
                    _fmt(r.vib_duty),
                    _fmt(r.v_electrode),
                    _fmt(r.v_releasable),
                    _fmt(r.v_residual),
                    _fmt(r.net_force),
                    _fmt(r.power),
                    _fmt(r.cumulative_energy),
                    r.event,
                )
            )
            + "\n"
        )
    return out.getvalue()


def write_csv(records: Sequence[TelemetryRecord], path: str | Path) -> None:
    Path(path).write_text(format_csv(records), encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> list[TelemetryRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",") != list(CSV_COLUMNS):
        raise ValueError(f"{path}: unexpected telemetry header")
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        values = [float(x) for x in parts[:-1]]
        records.append(TelemetryRecord(*values, event=parts[-1]))
    return records
