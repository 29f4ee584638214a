// Canvas painter for the chart model. Colors echo the usual presentation:
// solid depth trace, dashed red setpoint, green dashed disturbance marker.

import { ChartModel, EventMarker } from "./chart_model.js";

const EVENT_COLORS: Record<string, string> = {
  disturbance: "#2e9e4f",
  setpoint_change: "#888888",
  overflow: "#c57f00",
  bottom_contact: "#7a4b2a",
  surface_contact: "#2a6f7a",
};

export function drawChart(ctx: CanvasRenderingContext2D, model: ChartModel): void {
  const { plot } = model;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  ctx.strokeStyle = "#2b2b2b";
  ctx.lineWidth = 1;
  ctx.strokeRect(plot.x0, plot.y0, plot.x1 - plot.x0, plot.y1 - plot.y0);

  ctx.fillStyle = "#9a9a9a";
  ctx.font = "11px system-ui, sans-serif";
  ctx.textAlign = "center";
  for (const tick of model.xTicks) {
    ctx.fillText(tick.label, tick.pos, plot.y1 + 14);
  }
  ctx.textAlign = "right";
  for (const tick of model.yTicks) {
    ctx.fillText(tick.label, plot.x0 - 4, tick.pos + 4);
    ctx.strokeStyle = "#1f1f1f";
    ctx.beginPath();
    ctx.moveTo(plot.x0, tick.pos);
    ctx.lineTo(plot.x1, tick.pos);
    ctx.stroke();
  }
  ctx.save();
  ctx.translate(12, (plot.y0 + plot.y1) / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText("depth (mm)", 0, 0);
  ctx.restore();

  for (const marker of model.eventMarkers) {
    drawEventMarker(ctx, marker, plot.y0, plot.y1);
  }

  ctx.setLineDash([6, 4]);
  ctx.strokeStyle = "#d23b3b";
  ctx.lineWidth = 1.5;
  for (const seg of model.setpointSegments) {
    ctx.beginPath();
    ctx.moveTo(seg.x0, seg.y);
    ctx.lineTo(seg.x1, seg.y);
    ctx.stroke();
  }
  ctx.setLineDash([]);

  ctx.strokeStyle = "#6fa8dc";
  ctx.lineWidth = 1;
  for (const line of model.measuredPolylines) {
    strokePolyline(ctx, line.points);
  }
  ctx.strokeStyle = "#e8e8e8";
  ctx.lineWidth = 2;
  for (const line of model.depthPolylines) {
    strokePolyline(ctx, line.points);
  }
}

function strokePolyline(ctx: CanvasRenderingContext2D, pts: { x: number; y: number }[]): void {
  if (pts.length === 0) return;
  ctx.beginPath();
  ctx.moveTo(pts[0]!.x, pts[0]!.y);
  for (let i = 1; i < pts.length; i++) {
    ctx.lineTo(pts[i]!.x, pts[i]!.y);
  }
  ctx.stroke();
}

function drawEventMarker(
  ctx: CanvasRenderingContext2D,
  marker: EventMarker,
  y0: number,
  y1: number,
): void {
  ctx.setLineDash([3, 3]);
  ctx.strokeStyle = EVENT_COLORS[marker.kind] ?? "#666666";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(marker.x, y0);
  ctx.lineTo(marker.x, y1);
  ctx.stroke();
  ctx.setLineDash([]);
}
