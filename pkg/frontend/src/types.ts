/** Shared types mirroring the REST API payloads and the UI state model. */

export interface SummaryStats {
  min_loss: number;
  max_loss: number;
  mean_loss: number;
  center_loss: number | null;
  argmin_x: number;
  argmin_y: number;
  finite_count: number;
  masked_count: number;
}

export interface ExperimentEntry {
  id: string;
  name: string;
  created_at: string;
  metadata: Record<string, string>;
  stats: SummaryStats;
}

export interface GridPayload {
  id: string;
  x_values: number[];
  y_values: number[];
  losses: (number | null)[][];
  contour_levels: number[] | null;
  clip_radius: number | null;
}

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface Camera {
  eye: Vec3;
  center: Vec3;
  up: Vec3;
}

/** The fixed isometric default view; Home returns plots to it. */
export const DEFAULT_CAMERA: Camera = {
  eye: { x: 1.5, y: -1.5, z: 1.2 },
  center: { x: 0, y: 0, z: 0 },
  up: { x: 0, y: 0, z: 1 },
};

export function cloneCamera(camera: Camera): Camera {
  return {
    eye: { ...camera.eye },
    center: { ...camera.center },
    up: { ...camera.up },
  };
}

export function camerasEqual(a: Camera, b: Camera): boolean {
  const eq = (u: Vec3, v: Vec3) => u.x === v.x && u.y === v.y && u.z === v.z;
  return eq(a.eye, b.eye) && eq(a.center, b.center) && eq(a.up, b.up);
}

export type GlobalControl = "contours" | "sync" | "clip";

export interface GlobalControls {
  contours: boolean;
  sync: boolean;
  clip: boolean;
}

export interface PlotState {
  id: string;
  camera: Camera;
  contoursOn: boolean;
  clipOn: boolean;
  /** Whether this plot participates in camera synchronization. Camera moves
   * propagate between exactly the plots with syncOn. */
  syncOn: boolean;
  /** Which global controls this plot has locally overridden; an override
   * shields the plot from global toggles until its Home reset. */
  overrides: Record<GlobalControl, boolean>;
}

export const MAX_PLOTS = 6;
export const CONTOUR_COUNT = 8;
