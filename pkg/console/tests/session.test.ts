// End-to-end console behaviour against (a) a scripted in-process server
// replaying a canned session over real TCP, and (b) the actual Python
// gateway when it is available. The console must render exactly what the
// server sent: every tick once, in order, no client-side deviation.

import net from "node:net";
import { spawn, spawnSync } from "node:child_process";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { buildChartModel } from "../src/chart_model.js";
import { LineSplitter, TelemetryPayload } from "../src/protocol.js";
import { ConsoleStore } from "../src/store.js";
import { Transport } from "../src/transport.js";
import { makeSnapshot, makeTelemetry } from "./helpers.js";

class NodeTcpTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;
  private splitter = new LineSplitter();

  constructor(private socket: net.Socket) {
    socket.setNoDelay(true);
    socket.on("connect", () => this.onOpen?.());
    socket.on("close", () => this.onClose?.());
    socket.on("error", () => this.onClose?.());
    socket.on("data", (chunk) => {
      for (const line of this.splitter.push(chunk.toString("utf-8"))) {
        this.onLine?.(line);
      }
    });
  }

  send(line: string): void {
    this.socket.write(line);
  }

  close(): void {
    this.socket.destroy();
  }
}

function waitFor(check: () => boolean, timeoutMs = 5000, everyMs = 5): Promise<void> {
  return new Promise((resolve, reject) => {
    const started = Date.now();
    const poll = () => {
      if (check()) return resolve();
      if (Date.now() - started > timeoutMs) return reject(new Error("timeout waiting"));
      setTimeout(poll, everyMs);
    };
    poll();
  });
}

// -- scripted server -----------------------------------------------------------

interface ScriptedServer {
  server: net.Server;
  port: number;
  telemetrySent: TelemetryPayload[];
  close(): Promise<void>;
}

/** Replays a canned hover-disturbance-recovery session: acks every valid
 * command, errors on out-of-range targets, streams telemetry ticks. */
function startScriptedServer(): Promise<ScriptedServer> {
  const telemetrySent: TelemetryPayload[] = [];
  // canned depth trace: hover at 150 mm, disturbance excursion at t=2.0,
  // recovery back to the band
  const depths = [
    0.15, 0.15, 0.151, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15,
    0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.168,
    0.181, 0.19, 0.195, 0.193, 0.187, 0.179, 0.171, 0.163, 0.157, 0.152,
    0.15, 0.149, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15,
  ];
  const server = net.createServer((socket) => {
    socket.setNoDelay(true);
    const write = (msg: object) => socket.write(JSON.stringify(msg) + "\n");
    write({ kind: "snapshot", seq: 0, payload: makeSnapshot({ label: "scripted" }) });

    let seq = 0;
    let tick = 0;
    let setpoint = 0.15;
    const timer = setInterval(() => {
      if (tick >= depths.length) {
        clearInterval(timer);
        return;
      }
      const t = Number((tick * 0.1).toFixed(3));
      const payload = makeTelemetry(t, depths[tick]!, {
        setpoint,
        event: tick === 19 ? "disturbance" : "none",
      });
      telemetrySent.push(payload);
      seq += 1;
      write({ kind: "telemetry", seq, payload });
      tick += 1;
    }, 2);

    const splitter = new LineSplitter();
    socket.on("data", (chunk) => {
      for (const line of splitter.push(chunk.toString("utf-8"))) {
        const msg = JSON.parse(line);
        if (msg.kind !== "command") continue;
        const action = msg.payload?.action;
        if (action === "set_target_depth") {
          if (msg.payload.depth > 0.35 || msg.payload.depth < 0) {
            write({ kind: "error", seq: msg.seq, payload: { message: "target outside tank" } });
            continue;
          }
          setpoint = msg.payload.depth;
        }
        write({ kind: "ack", seq: msg.seq, payload: { action } });
      }
    });
    socket.on("error", () => {});
  });
  return new Promise((resolve) => {
    server.listen(0, "127.0.0.1", () => {
      const address = server.address() as net.AddressInfo;
      resolve({
        server,
        port: address.port,
        telemetrySent,
        close: () =>
          new Promise((done) => {
            server.close(() => done());
          }),
      });
    });
  });
}

describe("scripted server session", () => {
  it("renders every telemetry tick exactly once, in order, with exact values", async () => {
    const scripted = await startScriptedServer();
    const store = new ConsoleStore();
    const socket = net.connect(scripted.port, "127.0.0.1");
    store.attach(new NodeTcpTransport(socket));

    await waitFor(() => store.window.length >= 40);
    expect(store.status).toBe("connected");

    // exactly once, in order
    expect(store.window).toHaveLength(scripted.telemetrySent.length);
    expect(store.gaps).toHaveLength(0);
    store.window.forEach((point, i) => {
      const sent = scripted.telemetrySent[i]!;
      expect(point.t).toBe(sent.t);
      expect(point.depth).toBe(sent.depth); // no client-side deviation
      expect(point.event).toBe(sent.event);
    });

    // the chart model reproduces the excursion-and-recovery exactly
    const model = buildChartModel(store.window, store.gaps, {
      width: 800,
      height: 400,
      spanS: 120,
      tankDepthM: 0.35,
    });
    const rendered = model.depthPolylines.flatMap((line) => line.points);
    expect(rendered).toHaveLength(scripted.telemetrySent.length);
    expect(model.eventMarkers.map((m) => m.kind)).toEqual(["disturbance"]);
    // excursion peaks at 195 mm then returns into the band
    const depths = store.window.map((p) => p.depth);
    expect(Math.max(...depths)).toBeCloseTo(0.195, 12);
    expect(depths[depths.length - 1]!).toBeCloseTo(0.15, 12);

    store.detach();
    await scripted.close();
  });

  it("round-trips commands with acks and surfaces server errors", async () => {
    const scripted = await startScriptedServer();
    const store = new ConsoleStore();
    store.attach(new NodeTcpTransport(net.connect(scripted.port, "127.0.0.1")));
    await waitFor(() => store.status === "connected");

    const ok = store.setTargetDepth(0.2);
    await waitFor(() => !store.pending.has(ok));

    const gains = store.setGains(2.5, 0.9, 0.1);
    const pots = store.send({ action: "set_pots", pot_e: 128, pot_m: 0 });
    await waitFor(() => !store.pending.has(gains) && !store.pending.has(pots));

    const bad = store.setTargetDepth(0.9);
    await waitFor(() => !store.pending.has(bad));
    const lastToast = store.toasts[store.toasts.length - 1]!;
    expect(lastToast.isError).toBe(true);
    expect(lastToast.text).toContain("outside tank");

    // setpoint line follows the acked target on subsequent ticks
    await waitFor(() => store.window.some((p) => p.setpoint === 0.2));

    store.detach();
    await scripted.close();
  });
});

// -- real gateway (skipped when python/buoysim is unavailable) ---------------------

const repoRoot = path.resolve(__dirname, "..", "..");
const probe = spawnSync("python3", ["-c", "import buoysim"], { cwd: repoRoot });
const gatewayAvailable = probe.status === 0;

describe.skipIf(!gatewayAvailable)("live python gateway", () => {
  let proc: ReturnType<typeof spawn>;
  let port = 0;

  beforeAll(async () => {
    port = 20000 + Math.floor(Math.random() * 20000);
    proc = spawn(
      "python3",
      [
        "-m",
        "buoysim.gateway",
        "serve",
        "--scenario",
        "scenarios/hover_disturbance.json",
        "--port",
        String(port),
        "--pacing",
        "50",
      ],
      { cwd: repoRoot, stdio: ["ignore", "pipe", "pipe"] },
    );
    // poll until the port accepts connections
    await new Promise<void>((resolve, reject) => {
      const deadline = Date.now() + 12000;
      const tryConnect = () => {
        const probe = net.connect(port, "127.0.0.1");
        probe.once("connect", () => {
          probe.destroy();
          resolve();
        });
        probe.once("error", () => {
          probe.destroy();
          if (Date.now() > deadline) reject(new Error("gateway start timeout"));
          else setTimeout(tryConnect, 200);
        });
      };
      proc.once("exit", () => reject(new Error("gateway exited early")));
      tryConnect();
    });
  }, 15000);

  afterAll(() => {
    proc?.kill();
  });

  it("streams gapless telemetry and acks commands end to end", async () => {
    const store = new ConsoleStore();
    store.attach(new NodeTcpTransport(net.connect(port, "127.0.0.1")));
    await waitFor(() => store.snapshot !== null, 10000);
    expect(store.snapshot!.label).toBe("hover-disturbance");

    await waitFor(() => store.window.length >= 30, 10000);
    expect(store.gaps).toHaveLength(0);
    const times = store.window.map((p) => p.t);
    expect([...times].sort((a, b) => a - b)).toEqual(times);

    const seq = store.setTargetDepth(0.2);
    await waitFor(() => !store.pending.has(seq), 10000);
    await waitFor(() => store.window.some((p) => p.setpoint === 0.2), 10000);

    const bad = store.setTargetDepth(5.0);
    await waitFor(() => !store.pending.has(bad), 10000);
    expect(store.toasts.some((toast) => toast.isError)).toBe(true);

    const gains = store.setGains(10, 0, 0);
    await waitFor(() => !store.pending.has(gains), 10000);

    store.detach();
  }, 30000);
});
