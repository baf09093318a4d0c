/** Decode run-length-encoded per-pixel polarity counts. */

import type { RasterRun } from "./types.js";

export interface PixelCount {
  x: number;
  y: number;
  pos: number;
  neg: number;
}

/** Expand runs into per-pixel counts (row-major pixel index -> x, y). */
export function expandRuns(runs: RasterRun[], width: number): PixelCount[] {
  const out: PixelCount[] = [];
  for (const [start, length, pos, neg] of runs) {
    for (let k = 0; k < length; k++) {
      const idx = start + k;
      out.push({ x: idx % width, y: Math.floor(idx / width), pos, neg });
    }
  }
  return out;
}

/** Total event count represented by a frame's runs. */
export function runEventCount(runs: RasterRun[]): number {
  let total = 0;
  for (const [, length, pos, neg] of runs) {
    total += length * (pos + neg);
  }
  return total;
}

/** Paint runs into an RGBA buffer: red for net-positive pixels, blue for
 * net-negative, purple when balanced. Alpha scales with count. */
export function paintRuns(
  runs: RasterRun[],
  width: number,
  height: number,
  data: Uint8ClampedArray,
): void {
  for (const px of expandRuns(runs, width)) {
    if (px.y >= height) continue;
    const o = (px.y * width + px.x) * 4;
    const strength = Math.min(255, 90 + 55 * (px.pos + px.neg));
    data[o] = px.pos >= px.neg ? 235 : 40;
    data[o + 1] = 40;
    data[o + 2] = px.neg >= px.pos ? 235 : 40;
    data[o + 3] = strength;
  }
}
