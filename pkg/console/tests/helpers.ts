// Test doubles shared across the suite: a loopback transport, a manual
// clock, and canned server payloads.

import { SnapshotPayload, TelemetryPayload } from "../src/protocol.js";
import { Clock } from "../src/store.js";
import { Transport } from "../src/transport.js";

export class FakeTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(line: string): void {
    this.sent.push(line);
  }

  close(): void {
    this.closed = true;
    this.onClose?.();
  }

  // test hooks
  open(): void {
    this.onOpen?.();
  }

  feed(message: object): void {
    this.onLine?.(JSON.stringify(message));
  }

  feedRaw(line: string): void {
    this.onLine?.(line);
  }

  lastCommand(): { kind: string; seq: number; payload: Record<string, unknown> } {
    const last = this.sent[this.sent.length - 1];
    if (!last) throw new Error("nothing sent");
    return JSON.parse(last);
  }
}

export class ManualClock implements Clock {
  private t = 0;
  private timers: { at: number; fn: () => void; cancelled: boolean }[] = [];

  now(): number {
    return this.t;
  }

  schedule(fn: () => void, delayMs: number): () => void {
    const timer = { at: this.t + delayMs, fn, cancelled: false };
    this.timers.push(timer);
    return () => {
      timer.cancelled = true;
    };
  }

  advance(ms: number): void {
    this.t += ms;
    const due = this.timers.filter((timer) => !timer.cancelled && timer.at <= this.t);
    this.timers = this.timers.filter((timer) => !due.includes(timer));
    for (const timer of due) timer.fn();
  }
}

export function makeSnapshot(overrides: Partial<SnapshotPayload> = {}): SnapshotPayload {
  return {
    schema_version: 1,
    label: "test-session",
    mode: "auto",
    sim_time: 0,
    paused: false,
    finished: false,
    setpoint: 0.1,
    gains: { kp: 2.5, ki: 0.9, kd: 0.1 },
    control_period: 0.1,
    tank_depth: 0.35,
    ...overrides,
  };
}

export function makeTelemetry(
  t: number,
  depth: number,
  overrides: Partial<TelemetryPayload> = {},
): TelemetryPayload {
  return {
    t,
    depth,
    measured_depth: depth,
    setpoint: 0.1,
    output: 0,
    elec_duty: 0,
    vib_duty: 0,
    v_electrode: 5e-8,
    v_releasable: 4e-7,
    v_residual: 3e-7,
    net_force: 0,
    power: 0.26,
    cumulative_energy: 0.26 * t,
    event: "none",
    ...overrides,
  };
}
