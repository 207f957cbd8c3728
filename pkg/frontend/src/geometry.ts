import type { Point } from "./types.js";

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export interface Viewport {
  scale: number; // meters to pixels
  centerX: number; // world center mapped to the canvas center
  centerY: number;
  width: number;
  height: number;
}

export function boundsOfPolylines(polylines: Point[][]): Bounds | null {
  let bounds: Bounds | null = null;
  for (const polyline of polylines) {
    for (const [x, y] of polyline) {
      if (bounds === null) {
        bounds = { minX: x, minY: y, maxX: x, maxY: y };
      } else {
        bounds.minX = Math.min(bounds.minX, x);
        bounds.minY = Math.min(bounds.minY, y);
        bounds.maxX = Math.max(bounds.maxX, x);
        bounds.maxY = Math.max(bounds.maxY, y);
      }
    }
  }
  return bounds;
}

/** Fit bounds into a canvas with equal aspect ratio (meters stay square). */
export function fitViewport(
  bounds: Bounds,
  width: number,
  height: number,
  margin = 24,
): Viewport {
  const spanX = bounds.maxX - bounds.minX;
  const spanY = bounds.maxY - bounds.minY;
  const usableX = Math.max(width - 2 * margin, 1);
  const usableY = Math.max(height - 2 * margin, 1);
  let scale: number;
  if (spanX === 0 && spanY === 0) {
    scale = 1; // a single point; any scale centers it
  } else {
    scale = Math.min(
      spanX > 0 ? usableX / spanX : Number.POSITIVE_INFINITY,
      spanY > 0 ? usableY / spanY : Number.POSITIVE_INFINITY,
    );
  }
  return {
    scale,
    centerX: (bounds.minX + bounds.maxX) / 2,
    centerY: (bounds.minY + bounds.maxY) / 2,
    width,
    height,
  };
}

/** World meters to canvas pixels; north (+y) points up on screen. */
export function toScreen(point: Point, viewport: Viewport): Point {
  return [
    viewport.width / 2 + (point[0] - viewport.centerX) * viewport.scale,
    viewport.height / 2 - (point[1] - viewport.centerY) * viewport.scale,
  ];
}
