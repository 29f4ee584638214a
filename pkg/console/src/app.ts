// DOM wiring: one store, one chart, controls that emit commands. All
// socket and user events serialize through the store; this file only
// reads store state and forwards inputs.

import { buildChartModel } from "./chart_model.js";
import { drawChart } from "./chart.js";
import { ConsoleStore } from "./store.js";
import { WebSocketTransport } from "./transport.js";

const store = new ConsoleStore();

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const urlInput = byId<HTMLInputElement>("server-url");
const connectBtn = byId<HTMLButtonElement>("connect");
const statusBanner = byId<HTMLDivElement>("status-banner");
const canvas = byId<HTMLCanvasElement>("chart");
const modeAuto = byId<HTMLButtonElement>("mode-auto");
const modeManual = byId<HTMLButtonElement>("mode-manual");
const targetInput = byId<HTMLInputElement>("target-mm");
const targetBtn = byId<HTMLButtonElement>("send-target");
const kpInput = byId<HTMLInputElement>("gain-kp");
const kiInput = byId<HTMLInputElement>("gain-ki");
const kdInput = byId<HTMLInputElement>("gain-kd");
const gainsBtn = byId<HTMLButtonElement>("send-gains");
const potE = byId<HTMLInputElement>("pot-e");
const potM = byId<HTMLInputElement>("pot-m");
const potELabel = byId<HTMLSpanElement>("pot-e-value");
const potMLabel = byId<HTMLSpanElement>("pot-m-value");
const disturbBtn = byId<HTMLButtonElement>("inject");
const disturbInput = byId<HTMLInputElement>("disturb-ul");
const pauseBtn = byId<HTMLButtonElement>("pause");
const resumeBtn = byId<HTMLButtonElement>("resume");
const resetBtn = byId<HTMLButtonElement>("reset");
const pendingList = byId<HTMLDivElement>("pending");
const toastList = byId<HTMLDivElement>("toasts");
const readouts = byId<HTMLDivElement>("readouts");

connectBtn.addEventListener("click", () => {
  store.attach(new WebSocketTransport(urlInput.value));
});

modeAuto.addEventListener("click", () => store.setMode("auto"));
modeManual.addEventListener("click", () => store.setMode("manual"));
targetBtn.addEventListener("click", () => {
  const mm = Number(targetInput.value);
  if (Number.isFinite(mm)) store.setTargetDepth(mm / 1000);
});
gainsBtn.addEventListener("click", () => {
  store.setGains(Number(kpInput.value), Number(kiInput.value), Number(kdInput.value));
});
const sendPots = () => {
  potELabel.textContent = potE.value;
  potMLabel.textContent = potM.value;
  store.setPots(Number(potE.value), Number(potM.value));
};
potE.addEventListener("input", sendPots);
potM.addEventListener("input", sendPots);
disturbBtn.addEventListener("click", () => {
  const microliters = Number(disturbInput.value);
  if (Number.isFinite(microliters)) store.injectDisturbance(microliters * 1e-9);
});
pauseBtn.addEventListener("click", () => store.pause());
resumeBtn.addEventListener("click", () => store.resume());
resetBtn.addEventListener("click", () => store.reset());

function fmt(value: number, digits = 1): string {
  return value.toFixed(digits);
}

function render(): void {
  statusBanner.textContent =
    store.status === "connected"
      ? `connected - ${store.snapshot?.label ?? ""}${store.snapshot?.paused ? " (paused)" : ""}`
      : store.status;
  statusBanner.className = `banner ${store.status}`;

  const latest = store.window[store.window.length - 1];
  if (latest) {
    readouts.innerHTML = "";
    const rows: [string, string][] = [
      ["t", `${fmt(latest.t)} s`],
      ["depth", `${fmt(latest.depth * 1000)} mm`],
      ["setpoint", `${fmt(latest.setpoint * 1000)} mm`],
      ["output", fmt(latest.output, 0)],
      ["elec / vib", `${fmt(latest.elec_duty, 2)} / ${fmt(latest.vib_duty, 2)}`],
      ["power", `${fmt(latest.power, 2)} W`],
      ["energy", `${fmt(latest.cumulative_energy)} J`],
    ];
    for (const [label, value] of rows) {
      const div = document.createElement("div");
      div.innerHTML = `<span>${label}</span><strong>${value}</strong>`;
      readouts.appendChild(div);
    }
  }

  const model = buildChartModel(store.window, store.gaps, {
    width: canvas.width,
    height: canvas.height,
    spanS: store.windowSpanS,
    tankDepthM: store.snapshot?.tank_depth ?? 0.35,
  });
  const ctx = canvas.getContext("2d");
  if (ctx) drawChart(ctx, model);

  pendingList.innerHTML = "";
  for (const cmd of store.pending.values()) {
    const badge = document.createElement("span");
    badge.className = "pending-badge";
    badge.textContent = `${cmd.action} #${cmd.seq}...`;
    pendingList.appendChild(badge);
  }

  toastList.innerHTML = "";
  for (const toast of store.toasts.slice(-4)) {
    const div = document.createElement("div");
    div.className = toast.isError ? "toast error" : "toast";
    div.textContent = toast.text;
    toastList.appendChild(div);
  }
}

store.subscribe(() => requestAnimationFrame(render));
render();
