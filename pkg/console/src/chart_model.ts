// Pure geometry for the depth strip chart. No DOM here: the model maps
// telemetry to pixel-space primitives, the painter just draws them. Depth
// is plotted downward (0 at the surface, matching how the runs are
// presented), in millimetres.

import { TelemetryPoint } from "./store.js";

export interface ChartOptions {
  width: number;
  height: number;
  spanS: number; // visible time window
  tankDepthM: number;
  marginPx?: number;
}

export interface Polyline {
  points: { x: number; y: number }[];
}

export interface SetpointSegment {
  x0: number;
  x1: number;
  y: number;
  depthMm: number;
}

export interface EventMarker {
  x: number;
  t: number;
  kind: string;
}

export interface AxisTick {
  pos: number;
  label: string;
}

export interface ChartModel {
  tMin: number;
  tMax: number;
  depthPolylines: Polyline[]; // split at seq gaps, never interpolated across
  measuredPolylines: Polyline[];
  setpointSegments: SetpointSegment[];
  eventMarkers: EventMarker[];
  xTicks: AxisTick[];
  yTicks: AxisTick[];
  plot: { x0: number; y0: number; x1: number; y1: number };
}

export function buildChartModel(
  points: readonly TelemetryPoint[],
  gaps: readonly number[],
  options: ChartOptions,
): ChartModel {
  const margin = options.marginPx ?? 36;
  const plot = {
    x0: margin,
    y0: 8,
    x1: options.width - 8,
    y1: options.height - margin * 0.6,
  };
  const tMax = points.length > 0 ? points[points.length - 1]!.t : options.spanS;
  const tMin = Math.max(0, tMax - options.spanS);
  const depthMaxMm = options.tankDepthM * 1000;

  const xOf = (t: number) =>
    plot.x0 + ((t - tMin) / Math.max(tMax - tMin, 1e-9)) * (plot.x1 - plot.x0);
  // depth 0 (surface) at the top, tank bottom at the bottom edge
  const yOf = (depthMm: number) =>
    plot.y0 + (depthMm / Math.max(depthMaxMm, 1e-9)) * (plot.y1 - plot.y0);

  const gapSet = new Set(gaps);
  const visible = points.filter((p) => p.t >= tMin);

  const depthPolylines: Polyline[] = [];
  const measuredPolylines: Polyline[] = [];
  let currentTrue: { x: number; y: number }[] = [];
  let currentMeasured: { x: number; y: number }[] = [];
  const flush = () => {
    if (currentTrue.length > 0) depthPolylines.push({ points: currentTrue });
    if (currentMeasured.length > 0) measuredPolylines.push({ points: currentMeasured });
    currentTrue = [];
    currentMeasured = [];
  };
  for (const p of visible) {
    if (gapSet.has(p.t)) flush(); // stream break: start a new segment
    currentTrue.push({ x: xOf(p.t), y: yOf(p.depth * 1000) });
    currentMeasured.push({ x: xOf(p.t), y: yOf(p.measured_depth * 1000) });
  }
  flush();

  // one horizontal dashed segment per contiguous setpoint level
  const setpointSegments: SetpointSegment[] = [];
  let segStart: number | null = null;
  let segValue: number | null = null;
  for (const p of visible) {
    if (segValue === null || p.setpoint !== segValue) {
      if (segValue !== null && segStart !== null) {
        setpointSegments.push({
          x0: xOf(segStart),
          x1: xOf(p.t),
          y: yOf(segValue * 1000),
          depthMm: segValue * 1000,
        });
      }
      segStart = p.t;
      segValue = p.setpoint;
    }
  }
  if (segValue !== null && segStart !== null) {
    setpointSegments.push({
      x0: xOf(segStart),
      x1: xOf(tMax),
      y: yOf(segValue * 1000),
      depthMm: segValue * 1000,
    });
  }

  const eventMarkers: EventMarker[] = visible
    .filter((p) => p.event !== "none")
    .map((p) => ({ x: xOf(p.t), t: p.t, kind: p.event }));

  const xTicks: AxisTick[] = [];
  const tickEvery = niceStep(options.spanS / 6);
  for (let t = Math.ceil(tMin / tickEvery) * tickEvery; t <= tMax + 1e-9; t += tickEvery) {
    xTicks.push({ pos: xOf(t), label: `${Math.round(t)}s` });
  }
  const yTicks: AxisTick[] = [];
  const depthEvery = niceStep(depthMaxMm / 6);
  for (let d = 0; d <= depthMaxMm + 1e-9; d += depthEvery) {
    yTicks.push({ pos: yOf(d), label: `${Math.round(d)}` });
  }

  return {
    tMin,
    tMax,
    depthPolylines,
    measuredPolylines,
    setpointSegments,
    eventMarkers,
    xTicks,
    yTicks,
    plot,
  };
}

function niceStep(raw: number): number {
  if (raw <= 0) return 1;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const unit = raw / mag;
  if (unit <= 1) return mag;
  if (unit <= 2) return 2 * mag;
  if (unit <= 5) return 5 * mag;
  return 10 * mag;
}
