// Video-free playback: draw trace boxes on a canvas for a given time.

import { StreamGeometry, TraceData } from "./session.js";

export interface Box {
  cx: number;
  cy: number;
  w: number;
  h: number;
}

/** Subset of CanvasRenderingContext2D the renderer needs (stubbed in tests). */
export interface RectContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
}

const PALETTE = ["#e6553f", "#3fa7e6", "#53c464", "#e0b73d", "#a06de0", "#e06daa"];

export function boxAt(trace: TraceData, frame: number): Box | null {
  if (trace.entries.length === 0) return null;
  const start = trace.entries[0][0];
  const idx = frame - start;
  if (idx < 0 || idx >= trace.entries.length) return null;
  const [, cx, cy, w, h] = trace.entries[idx];
  return { cx, cy, w, h };
}

/**
 * Draw every trace visible at `timeSeconds`, scaled from stream pixels to
 * the view size. Returns the number of boxes drawn.
 */
export function renderTraces(
  ctx: RectContext,
  traces: TraceData[],
  geometry: StreamGeometry,
  timeSeconds: number,
  viewWidth: number,
  viewHeight: number,
): number {
  const frame = Math.floor(timeSeconds * geometry.fps);
  const sx = viewWidth / geometry.width;
  const sy = viewHeight / geometry.height;
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, viewWidth, viewHeight);
  let drawn = 0;
  for (const trace of traces) {
    const box = boxAt(trace, frame);
    if (!box) continue;
    ctx.strokeStyle = PALETTE[trace.id % PALETTE.length];
    ctx.lineWidth = trace.kind === "group" ? 1 : 2;
    ctx.strokeRect(
      (box.cx - box.w / 2) * sx,
      (box.cy - box.h / 2) * sy,
      box.w * sx,
      box.h * sy,
    );
    drawn++;
  }
  return drawn;
}
