/** Plotly-backed renderer: z and color both encode the loss, masked points
 * are holes, contours overlay the surface, and the hover modebar carries the
 * per-plot Contours/Sync/Clip/Home actions plus the built-in PNG button. */

import { ModebarAction, PlotHandlers, PlotRenderer } from "./plotAdapter";
import { cameraToPlotly, COLORSCALE, surfaceSpec } from "./surface";
import { Camera, GridPayload } from "./types";

declare global {
  interface Window {
    Plotly: any;
  }
}

interface PlotEntry {
  el: any;
  suppressEvents: boolean;
}

const ACTION_LABELS: Record<ModebarAction, string> = {
  contours: "toggle contours (this plot)",
  sync: "toggle camera sync (this plot)",
  clip: "toggle corner clipping (this plot)",
  home: "reset view (this plot)",
};

export class PlotlyRenderer implements PlotRenderer {
  private plots = new Map<string, PlotEntry>();

  render(
    host: HTMLElement,
    id: string,
    title: string,
    grid: GridPayload,
    contoursOn: boolean,
    camera: Camera,
    handlers: PlotHandlers,
  ): void {
    const plotly = window.Plotly;
    const spec = surfaceSpec(grid, contoursOn);
    const trace: any = {
      type: "surface",
      x: spec.x,
      y: spec.y,
      z: spec.z,
      colorscale: COLORSCALE,
      showscale: false,
      connectgaps: false,
    };
    if (spec.cmin !== null) {
      trace.cmin = spec.cmin;
      trace.cmax = spec.cmax;
    }
    trace.contours = {
      z: {
        show: spec.contours !== null,
        usecolormap: true,
        project: { z: false },
        ...(spec.contours ?? {}),
      },
    };
    const layout = {
      title: { text: title, font: { size: 12 } },
      margin: { l: 0, r: 0, t: 24, b: 0 },
      scene: {
        camera: cameraToPlotly(camera),
        xaxis: { title: "x" },
        yaxis: { title: "y" },
        zaxis: { title: "loss" },
      },
      uirevision: id,
    };
    const config = {
      displaylogo: false,
      modeBarButtonsToAdd: (["home", "clip", "contours", "sync"] as ModebarAction[]).map(
        (action) => ({
          name: ACTION_LABELS[action],
          icon: window.Plotly.Icons[action === "home" ? "home" : "pencil"],
          click: () => handlers.onAction(action),
        }),
      ),
      modeBarButtonsToRemove: ["orbitRotation", "resetCameraDefault3d"],
      toImageButtonOptions: { format: "png", filename: `losscape-${id}` },
    };

    let entry = this.plots.get(id);
    if (entry === undefined) {
      const el = document.createElement("div");
      el.className = "plot-surface";
      host.appendChild(el);
      entry = { el, suppressEvents: false };
      this.plots.set(id, entry);
      plotly.newPlot(el, [trace], layout, config);
      el.addEventListener("remove", () => plotly.purge(el));
      (el as any).on("plotly_relayout", (event: any) => {
        if (entry!.suppressEvents) return;
        const moved = event["scene.camera"];
        if (moved && moved.eye) {
          handlers.onCamera({
            eye: { ...moved.eye },
            center: { ...(moved.center ?? { x: 0, y: 0, z: 0 }) },
            up: { ...(moved.up ?? { x: 0, y: 0, z: 1 }) },
          });
        }
      });
    } else {
      plotly.react(entry.el, [trace], layout, config);
    }
  }

  setCamera(id: string, camera: Camera): void {
    const entry = this.plots.get(id);
    if (!entry) return;
    entry.suppressEvents = true;
    try {
      window.Plotly.relayout(entry.el, { "scene.camera": cameraToPlotly(camera) });
    } finally {
      entry.suppressEvents = false;
    }
  }

  remove(id: string): void {
    const entry = this.plots.get(id);
    if (!entry) return;
    window.Plotly.purge(entry.el);
    entry.el.remove();
    this.plots.delete(id);
  }
}
