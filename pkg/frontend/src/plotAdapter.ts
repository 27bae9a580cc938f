/** Renderer abstraction: the app drives this interface, tests mock it, and
 * plotly.ts implements it with Plotly 3D surfaces. */

import { Camera, GlobalControl, GridPayload } from "./types";

export type ModebarAction = GlobalControl | "home";

export interface PlotHandlers {
  /** User moved the camera (rotate/zoom/pan). */
  onCamera: (camera: Camera) => void;
  /** User clicked one of the per-plot modebar actions. */
  onAction: (action: ModebarAction) => void;
}

export interface PlotRenderer {
  /** Create or replace the plot for an experiment inside `host`. */
  render(
    host: HTMLElement,
    id: string,
    title: string,
    grid: GridPayload,
    contoursOn: boolean,
    camera: Camera,
    handlers: PlotHandlers,
  ): void;
  /** Move a plot's camera without emitting onCamera. */
  setCamera(id: string, camera: Camera): void;
  remove(id: string): void;
}
