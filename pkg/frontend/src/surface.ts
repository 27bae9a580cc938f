/** Pure helpers that turn grid payloads into plot configuration. */

import { Camera, GridPayload } from "./types";

/** One shared perceptually-uniform colormap; each plot normalizes it to its
 * own finite loss range so shapes stay comparable without implying a shared
 * scale. */
export const COLORSCALE = "Viridis";

export interface SurfaceSpec {
  x: number[];
  y: number[];
  z: (number | null)[][];
  cmin: number | null;
  cmax: number | null;
  contours: { start: number; end: number; size: number } | null;
}

export function finiteRange(losses: (number | null)[][]): { min: number; max: number } | null {
  let min = Infinity;
  let max = -Infinity;
  for (const row of losses) {
    for (const value of row) {
      if (value === null || !Number.isFinite(value)) continue;
      if (value < min) min = value;
      if (value > max) max = value;
    }
  }
  return min <= max ? { min, max } : null;
}

/** Build the renderer-agnostic surface description. Masked (null) entries
 * become holes; contour levels come from the server when contours are on. */
export function surfaceSpec(grid: GridPayload, contoursOn: boolean): SurfaceSpec {
  const range = finiteRange(grid.losses);
  let contours: SurfaceSpec["contours"] = null;
  const levels = grid.contour_levels;
  if (contoursOn && levels && levels.length > 0) {
    const size = levels.length > 1 ? levels[1] - levels[0] : Math.max(Math.abs(levels[0]), 1);
    contours = { start: levels[0], end: levels[levels.length - 1], size };
  }
  return {
    x: grid.x_values,
    y: grid.y_values,
    z: grid.losses,
    cmin: range ? range.min : null,
    cmax: range ? range.max : null,
    contours,
  };
}

function axisSpan(values: number[]): [number, number] {
  return [values[0], values[values.length - 1]];
}

/** True when the plotted experiments do not share one x-y plane; the UI
 * shows a persistent warning badge instead of rejecting them. */
export function rangesDiffer(grids: GridPayload[]): boolean {
  if (grids.length < 2) return false;
  const spans = grids.map((g) => [...axisSpan(g.x_values), ...axisSpan(g.y_values)].join(","));
  return new Set(spans).size > 1;
}

export function cameraToPlotly(camera: Camera): object {
  return {
    eye: { ...camera.eye },
    center: { ...camera.center },
    up: { ...camera.up },
  };
}
