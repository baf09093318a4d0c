/** Canvas painting: polarity raster, cluster hulls, labels, trajectories.
 *
 * Everything drawn here comes straight from service responses.
 */

import { paintRuns } from "./rle.js";
import type { ClusterInfo, LabelRow, RasterRun } from "./types.js";
import type { ViewState } from "./state.js";

export interface Camera {
  zoom: number;
  panX: number;
  panY: number;
}

export function toScreen(cam: Camera, x: number, y: number): [number, number] {
  return [(x - cam.panX) * cam.zoom, (y - cam.panY) * cam.zoom];
}

export function toWorld(cam: Camera, sx: number, sy: number): [number, number] {
  return [sx / cam.zoom + cam.panX, sy / cam.zoom + cam.panY];
}

export function drawRaster(
  ctx: CanvasRenderingContext2D,
  runs: RasterRun[],
  width: number,
  height: number,
  cam: Camera,
): void {
  const img = new ImageData(width, height);
  paintRuns(runs, width, height, img.data);
  const off = new OffscreenCanvas(width, height);
  const octx = off.getContext("2d")!;
  octx.putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, -cam.panX * cam.zoom, -cam.panY * cam.zoom,
                width * cam.zoom, height * cam.zoom);
}

export function drawClusters(
  ctx: CanvasRenderingContext2D,
  clusters: ClusterInfo[],
  cam: Camera,
): void {
  for (const c of clusters) {
    const [x0, y0] = toScreen(cam, c.bbox[0] - 1, c.bbox[1] - 1);
    const [x1, y1] = toScreen(cam, c.bbox[2] + 1, c.bbox[3] + 1);
    ctx.strokeStyle = c.outlier ? "#777" : c.matched_led ? "#2c9" : "#fa0";
    ctx.lineWidth = 1;
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
    if (c.cost !== null) {
      ctx.fillStyle = "#2c9";
      ctx.font = "10px monospace";
      ctx.fillText(c.cost.toFixed(0), x1 + 2, y0 + 8);
    }
  }
}

export function drawLabels(
  ctx: CanvasRenderingContext2D,
  labels: (LabelRow & { pending?: boolean })[],
  selected: string | null,
  cam: Camera,
): void {
  for (const row of labels) {
    const [sx, sy] = toScreen(cam, row.x, row.y);
    const isSel = row.led_id === selected;
    ctx.beginPath();
    ctx.arc(sx, sy, isSel ? 6 : 4, 0, Math.PI * 2);
    ctx.strokeStyle = row.pending ? "#ff0"
      : row.source === "corrected" ? "#f80" : "#e33";
    ctx.lineWidth = isSel ? 2.5 : 1.5;
    ctx.stroke();
    ctx.fillStyle = "#e33";
    ctx.font = "11px sans-serif";
    ctx.fillText(row.led_id, sx + 7, sy - 5);
  }
}

export function drawTrajectory(
  ctx: CanvasRenderingContext2D,
  trace: LabelRow[],
  cam: Camera,
): void {
  if (trace.length < 2) return;
  ctx.beginPath();
  trace.forEach((row, i) => {
    const [sx, sy] = toScreen(cam, row.x, row.y);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.strokeStyle = "rgba(80, 180, 255, 0.8)";
  ctx.lineWidth = 1.2;
  ctx.stroke();
}

/** Nearest label within radius (screen px) of a screen point. */
export function hitTestLabel(
  labels: LabelRow[],
  cam: Camera,
  sx: number,
  sy: number,
  radius = 12,
): LabelRow | null {
  let best: LabelRow | null = null;
  let bestD = radius * radius;
  for (const row of labels) {
    const [lx, ly] = toScreen(cam, row.x, row.y);
    const d = (lx - sx) ** 2 + (ly - sy) ** 2;
    if (d <= bestD) {
      best = row;
      bestD = d;
    }
  }
  return best;
}

/** Nearest cluster (by centroid) within radius of a screen point. */
export function hitTestCluster(
  clusters: ClusterInfo[],
  cam: Camera,
  sx: number,
  sy: number,
  radius = 14,
): ClusterInfo | null {
  let best: ClusterInfo | null = null;
  let bestD = radius * radius;
  for (const c of clusters) {
    const [cx, cy] = toScreen(cam, c.centroid[0], c.centroid[1]);
    const d = (cx - sx) ** 2 + (cy - sy) ** 2;
    if (d <= bestD) {
      best = c;
      bestD = d;
    }
  }
  return best;
}

export function statusLine(state: ViewState): string {
  const sel = state.selected ?? "none";
  const pend = state.pending.length;
  return `tick ${state.tick}/${state.nTicks - 1}  selected ${sel}  ` +
    `pending ${pend}  v${state.version}`;
}
