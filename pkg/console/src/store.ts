// Single state store for the console. Socket events and user events all
// funnel through here; the DOM layer and the chart only read from it.
//
// Invariants it enforces:
//  - only acked, in-sequence telemetry reaches the chart window: stale or
//    duplicate seq is dropped, a forward jump records a gap marker and the
//    chart never interpolates across it;
//  - commands are pending until their ack/error arrives (matched by seq);
//  - set_pots is rate-limited to one message per control tick.

import {
  CommandPayload,
  ProtocolError,
  SnapshotPayload,
  TelemetryPayload,
  parseServerMessage,
} from "./protocol.js";
import { Transport } from "./transport.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface TelemetryPoint extends TelemetryPayload {
  seq: number;
}

export interface PendingCommand {
  seq: number;
  action: string;
  sentAt: number;
}

export interface Toast {
  text: string;
  isError: boolean;
  at: number;
}

export interface Clock {
  now(): number; // milliseconds
  schedule(fn: () => void, delayMs: number): () => void; // returns cancel
}

export const realClock: Clock = {
  now: () => Date.now(),
  schedule: (fn, delayMs) => {
    const id = setTimeout(fn, delayMs);
    return () => clearTimeout(id);
  },
};

export interface StoreOptions {
  windowSpanS?: number; // rolling telemetry window, default 120 s
  clock?: Clock;
}

export class ConsoleStore {
  status: ConnectionStatus = "disconnected";
  snapshot: SnapshotPayload | null = null;
  window: TelemetryPoint[] = [];
  gaps: number[] = []; // t of the first point after each seq gap
  pending = new Map<number, PendingCommand>();
  toasts: Toast[] = [];
  lastHeartbeat: number | null = null;
  windowSpanS: number;

  private transport: Transport | null = null;
  private nextSeq = 1;
  private lastTelemetrySeq: number | null = null;
  private clock: Clock;
  private listeners = new Set<() => void>();

  // set_pots rate limiting
  private potsLastSent = -Infinity;
  private potsQueued: { pot_e: number; pot_m: number } | null = null;
  private potsCancel: (() => void) | null = null;

  constructor(options: StoreOptions = {}) {
    this.windowSpanS = options.windowSpanS ?? 120;
    this.clock = options.clock ?? realClock;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get controlPeriodMs(): number {
    return (this.snapshot?.control_period ?? 0.1) * 1000;
  }

  // -- connection lifecycle --------------------------------------------------

  attach(transport: Transport): void {
    this.detach();
    this.transport = transport;
    this.status = "connecting";
    transport.onOpen = () => {
      this.status = "connected";
      this.emit();
    };
    transport.onClose = () => {
      this.status = "disconnected";
      this.pending.clear();
      this.emit();
    };
    transport.onLine = (line) => this.handleLine(line);
    this.emit();
  }

  detach(): void {
    if (this.transport) {
      this.transport.onLine = null;
      this.transport.onOpen = null;
      this.transport.onClose = null;
      this.transport.close();
      this.transport = null;
    }
    this.status = "disconnected";
    this.lastTelemetrySeq = null;
    this.emit();
  }

  // -- inbound ----------------------------------------------------------------

  handleLine(line: string): void {
    let msg;
    try {
      msg = parseServerMessage(line);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.toast(`protocol: ${err.message}`, true);
        return;
      }
      throw err;
    }
    switch (msg.kind) {
      case "snapshot":
        this.snapshot = msg.payload;
        // a fresh snapshot begins a fresh telemetry stream
        this.lastTelemetrySeq = null;
        break;
      case "telemetry":
        this.acceptTelemetry(msg.seq, msg.payload);
        break;
      case "heartbeat":
        this.lastHeartbeat = msg.payload.wall_time;
        break;
      case "ack": {
        const cmd = this.pending.get(msg.seq);
        this.pending.delete(msg.seq);
        if (cmd && (cmd.action === "set_target_depth" || cmd.action === "set_gains")) {
          this.toast(`${cmd.action} applied`, false);
        }
        break;
      }
      case "error": {
        const cmd = this.pending.get(msg.seq);
        this.pending.delete(msg.seq);
        const who = cmd ? cmd.action : `seq ${msg.seq}`;
        this.toast(`${who}: ${msg.payload.message}`, true);
        break;
      }
    }
    this.emit();
  }

  private acceptTelemetry(seq: number, payload: TelemetryPayload): void {
    if (this.lastTelemetrySeq !== null) {
      if (seq <= this.lastTelemetrySeq) {
        return; // duplicate or stale: never rendered twice
      }
      if (seq > this.lastTelemetrySeq + 1) {
        this.gaps.push(payload.t); // missed ticks: visible break, no interpolation
      }
    }
    this.lastTelemetrySeq = seq;
    this.window.push({ seq, ...payload });
    const cutoff = payload.t - this.windowSpanS;
    while (this.window.length > 0 && this.window[0]!.t < cutoff) {
      this.window.shift();
    }
    while (this.gaps.length > 0 && this.gaps[0]! < cutoff) {
      this.gaps.shift();
    }
    if (this.snapshot) {
      this.snapshot = { ...this.snapshot, setpoint: payload.setpoint, sim_time: payload.t };
    }
  }

  private toast(text: string, isError: boolean): void {
    this.toasts.push({ text, isError, at: this.clock.now() });
    if (this.toasts.length > 6) this.toasts.shift();
  }

  // -- outbound -----------------------------------------------------------------

  send(payload: CommandPayload): number {
    if (!this.transport || this.status !== "connected") {
      this.toast("not connected", true);
      return -1;
    }
    const seq = this.nextSeq++;
    this.pending.set(seq, { seq, action: payload.action, sentAt: this.clock.now() });
    this.transport.send(JSON.stringify({ kind: "command", seq, payload }) + "\n");
    this.emit();
    return seq;
  }

  setTargetDepth(depthM: number): number {
    return this.send({ action: "set_target_depth", depth: depthM });
  }

  setGains(kp: number, ki: number, kd: number): number {
    return this.send({ action: "set_gains", kp, ki, kd });
  }

  setMode(mode: "auto" | "manual"): number {
    return this.send({ action: "set_mode", mode });
  }

  injectDisturbance(volumeM3: number): number {
    return this.send({ action: "inject_disturbance", volume: volumeM3 });
  }

  pause(): number {
    return this.send({ action: "pause" });
  }

  resume(): number {
    return this.send({ action: "resume" });
  }

  reset(): number {
    return this.send({ action: "reset" });
  }

  /** Slider input: at most one set_pots per control tick; the latest
   * values win when the slider moves faster than that. */
  setPots(potE: number, potM: number): void {
    const period = this.controlPeriodMs;
    const now = this.clock.now();
    const elapsed = now - this.potsLastSent;
    if (elapsed >= period) {
      this.potsLastSent = now;
      this.send({ action: "set_pots", pot_e: potE, pot_m: potM });
      return;
    }
    this.potsQueued = { pot_e: potE, pot_m: potM };
    if (!this.potsCancel) {
      this.potsCancel = this.clock.schedule(() => {
        this.potsCancel = null;
        const queued = this.potsQueued;
        this.potsQueued = null;
        if (queued) {
          this.potsLastSent = this.clock.now();
          this.send({ action: "set_pots", ...queued });
        }
      }, period - elapsed);
    }
  }
}
