"""Wire protocol: newline-delimited JSON messages over one socket.

Message shape: {"kind": ..., "seq": int, "payload": {...}}.  Kinds sent by
the server are telemetry, snapshot, heartbeat, ack and error; clients send
command.  Telemetry seq is per-connection and gapless; ack and error echo
the seq of the command they answer.  Field-by-field documentation lives in
docs/wire_protocol.md.
"""

from __future__ import annotations

import json
from typing import Any

from buoysim.telemetry import TelemetryRecord

__all__ = [
    "COMMAND_ACTIONS",
    "ProtocolError",
    "encode",
    "parse_line",
    "telemetry_payload",
]

SERVER_KINDS = ("telemetry", "snapshot", "heartbeat", "ack", "error")
CLIENT_KINDS = ("command",)

COMMAND_ACTIONS = (
    "set_mode",
    "set_target_depth",
    "set_gains",
    "set_pots",
    "pause",
    "resume",
    "reset",
    "inject_disturbance",
)


class ProtocolError(ValueError):
    pass


def encode(kind: str, seq: int, payload: dict[str, Any] | None = None) -> bytes:
    line = json.dumps(
        {"kind": kind, "seq": seq, "payload": payload or {}},
        separators=(",", ":"),
        sort_keys=True,
    )
    return line.encode("utf-8") + b"\n"


def parse_line(line: str | bytes) -> dict[str, Any]:
    """Parse and structurally validate one message line."""
    if isinstance(line, bytes):
        line = line.decode("utf-8", errors="replace")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    kind = msg.get("kind")
    if kind not in SERVER_KINDS and kind not in CLIENT_KINDS:
        raise ProtocolError(f"unknown kind {kind!r}")
    seq = msg.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise ProtocolError("seq must be an integer")
    payload = msg.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("payload must be an object")
    if kind == "command":
        action = payload.get("action")
        if action not in COMMAND_ACTIONS:
            raise ProtocolError(f"unknown command action {action!r}")
    return {"kind": kind, "seq": seq, "payload": payload}


def telemetry_payload(record: TelemetryRecord) -> dict[str, Any]:
    return {
        "t": record.t,
        "depth": record.depth,
        "measured_depth": record.measured_depth,
        "setpoint": record.setpoint,
        "output": record.output,
        "elec_duty": record.elec_duty,
        "vib_duty": record.vib_duty,
        "v_electrode": record.v_electrode,
        "v_releasable": record.v_releasable,
        "v_residual": record.v_residual,
        "net_force": record.net_force,
        "power": record.power,
        "cumulative_energy": record.cumulative_energy,
        "event": record.event,
    }
