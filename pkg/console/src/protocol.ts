// Wire protocol types and parsing for the session server's newline-JSON
// messages (see docs/wire_protocol.md in the repo root). The console is a
// pure protocol client: every number it displays comes from these
// payloads.

export interface TelemetryPayload {
  t: number;
  depth: number;
  measured_depth: number;
  setpoint: number;
  output: number;
  elec_duty: number;
  vib_duty: number;
  v_electrode: number;
  v_releasable: number;
  v_residual: number;
  net_force: number;
  power: number;
  cumulative_energy: number;
  event: string;
}

export interface SnapshotPayload {
  schema_version: number;
  label: string;
  mode: "auto" | "manual";
  sim_time: number;
  paused: boolean;
  finished: boolean;
  setpoint: number;
  gains: { kp: number; ki: number; kd: number };
  control_period: number;
  tank_depth: number;
}

export type ServerMessage =
  | { kind: "telemetry"; seq: number; payload: TelemetryPayload }
  | { kind: "snapshot"; seq: number; payload: SnapshotPayload }
  | { kind: "heartbeat"; seq: number; payload: { wall_time: number } }
  | { kind: "ack"; seq: number; payload: { action?: string } }
  | { kind: "error"; seq: number; payload: { message: string } };

export type CommandPayload =
  | { action: "set_mode"; mode: "auto" | "manual" }
  | { action: "set_target_depth"; depth: number }
  | { action: "set_gains"; kp: number; ki: number; kd: number }
  | { action: "set_pots"; pot_e: number; pot_m: number }
  | { action: "inject_disturbance"; volume: number }
  | { action: "pause" }
  | { action: "resume" }
  | { action: "reset" };

const SERVER_KINDS = new Set(["telemetry", "snapshot", "heartbeat", "ack", "error"]);

const TELEMETRY_NUMBER_FIELDS: (keyof TelemetryPayload)[] = [
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
];

export class ProtocolError extends Error {}

export function parseServerMessage(line: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`not valid JSON: ${String(err)}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new ProtocolError("message must be an object");
  }
  const msg = raw as { kind?: unknown; seq?: unknown; payload?: unknown };
  if (typeof msg.kind !== "string" || !SERVER_KINDS.has(msg.kind)) {
    throw new ProtocolError(`unknown kind ${JSON.stringify(msg.kind)}`);
  }
  if (typeof msg.seq !== "number" || !Number.isInteger(msg.seq)) {
    throw new ProtocolError("seq must be an integer");
  }
  const payload = (msg.payload ?? {}) as Record<string, unknown>;
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new ProtocolError("payload must be an object");
  }
  if (msg.kind === "telemetry") {
    for (const field of TELEMETRY_NUMBER_FIELDS) {
      if (typeof payload[field] !== "number") {
        throw new ProtocolError(`telemetry payload missing numeric ${field}`);
      }
    }
    if (typeof payload["event"] !== "string") {
      throw new ProtocolError("telemetry payload missing event");
    }
  }
  return { kind: msg.kind, seq: msg.seq, payload } as ServerMessage;
}

export function encodeCommand(seq: number, payload: CommandPayload): string {
  return JSON.stringify({ kind: "command", seq, payload }) + "\n";
}

/** Splits a byte/text stream into complete lines, buffering partials. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const parts = this.buffer.split("\n");
    this.buffer = parts.pop() ?? "";
    return parts.filter((p) => p.trim().length > 0);
  }
}
