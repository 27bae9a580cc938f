/** Test doubles: a recording renderer and a small in-memory backend that
 * speaks the service's REST dialect through a fetch-compatible function. */

import { ModebarAction, PlotHandlers, PlotRenderer } from "../src/plotAdapter";
import { Camera, ExperimentEntry, GridPayload } from "../src/types";

export interface RenderCall {
  id: string;
  title: string;
  grid: GridPayload;
  contoursOn: boolean;
  camera: Camera;
}

export class RecordingRenderer implements PlotRenderer {
  renders: RenderCall[] = [];
  cameraSets: { id: string; camera: Camera }[] = [];
  removed: string[] = [];
  handlers = new Map<string, PlotHandlers>();
  mounted = new Set<string>();

  render(
    host: HTMLElement,
    id: string,
    title: string,
    grid: GridPayload,
    contoursOn: boolean,
    camera: Camera,
    handlers: PlotHandlers,
  ): void {
    this.renders.push({ id, title, grid, contoursOn, camera });
    this.handlers.set(id, handlers);
    this.mounted.add(id);
  }

  setCamera(id: string, camera: Camera): void {
    this.cameraSets.push({ id, camera });
  }

  remove(id: string): void {
    this.removed.push(id);
    this.mounted.delete(id);
    this.handlers.delete(id);
  }

  lastRenderOf(id: string): RenderCall | undefined {
    return [...this.renders].reverse().find((call) => call.id === id);
  }

  /** Simulate the user rotating a plot. */
  moveCamera(id: string, camera: Camera): void {
    this.handlers.get(id)!.onCamera(camera);
  }

  /** Simulate a per-plot modebar click. */
  clickModebar(id: string, action: ModebarAction): void {
    this.handlers.get(id)!.onAction(action);
  }
}

interface StoredGrid {
  x: number[];
  y: number[];
  losses: (number | null)[][];
}

function parseLoss(raw: string): number | null {
  if (raw === "NaN") return null;
  if (raw === "Infinity" || raw === "-Infinity") return null;
  return parseFloat(raw);
}

/** Minimal 4-column CSV reassembly, independent of the production parser. */
export function parseCsvRows(text: string): Map<string, StoredGrid> {
  const lines = text.trim().split("\n");
  const header = lines[0].split(",");
  const col = (name: string) => header.indexOf(name);
  const [idC, xC, yC, lossC] = [col("id"), col("x"), col("y"), col("loss")];
  if (idC < 0 || xC < 0 || yC < 0 || lossC < 0) {
    throw new BackendError(400, `missing required column`);
  }
  const byId = new Map<string, Map<string, number | null>>();
  for (const line of lines.slice(1)) {
    if (!line) continue;
    const parts = line.split(",");
    const id = parts[idC];
    const points = byId.get(id) ?? new Map();
    points.set(`${parseFloat(parts[xC])}|${parseFloat(parts[yC])}`, parseLoss(parts[lossC]));
    byId.set(id, points);
  }
  const grids = new Map<string, StoredGrid>();
  for (const [id, points] of byId) {
    const keys = [...points.keys()].map((k) => k.split("|").map(parseFloat));
    const xs = [...new Set(keys.map(([x]) => x))].sort((a, b) => a - b);
    const ys = [...new Set(keys.map(([, y]) => y))].sort((a, b) => a - b);
    const losses = ys.map((y) => xs.map((x) => points.get(`${x}|${y}`) ?? null));
    grids.set(id, { x: xs, y: ys, losses });
  }
  return grids;
}

class BackendError extends Error {
  constructor(public status: number, public detail: string) {
    super(detail);
  }
}

export class FakeBackend {
  grids = new Map<string, StoredGrid>();
  urls = new Map<string, string>();

  /** Register a file the "remote" URL endpoint can fetch. */
  serveUrl(url: string, csv: string): void {
    this.urls.set(url, csv);
  }

  reset(): void {
    this.grids.clear();
  }

  private upload(csv: string): ExperimentEntry[] {
    const parsed = parseCsvRows(csv);
    for (const id of parsed.keys()) {
      if (this.grids.has(id)) throw new BackendError(409, `experiment id '${id}' already exists`);
    }
    const created: ExperimentEntry[] = [];
    for (const [id, grid] of parsed) {
      this.grids.set(id, grid);
      created.push(this.entry(id));
    }
    return created;
  }

  private entry(id: string): ExperimentEntry {
    const grid = this.grids.get(id)!;
    const finite = grid.losses.flat().filter((v): v is number => v !== null);
    const min = Math.min(...finite);
    const max = Math.max(...finite);
    return {
      id,
      name: id,
      created_at: "2026-01-01T00:00:00+00:00",
      metadata: {},
      stats: {
        min_loss: min,
        max_loss: max,
        mean_loss: finite.reduce((a, b) => a + b, 0) / finite.length,
        center_loss: null,
        argmin_x: 0,
        argmin_y: 0,
        finite_count: finite.length,
        masked_count: grid.losses.flat().length - finite.length,
      },
    };
  }

  private gridPayload(id: string, params: URLSearchParams): GridPayload {
    const grid = this.grids.get(id);
    if (!grid) throw new BackendError(404, `no experiment with id '${id}'`);
    let losses = grid.losses.map((row) => [...row]);
    let clipRadius: number | null = null;
    const clip = params.get("clip") ?? "off";
    if (clip !== "off") {
      clipRadius =
        clip === "auto"
          ? Math.min(
              Math.max(...grid.x.map(Math.abs)),
              Math.max(...grid.y.map(Math.abs)),
            )
          : parseFloat(clip);
      losses = grid.y.map((y, j) =>
        grid.x.map((x, i) => (Math.hypot(x, y) > clipRadius! ? null : losses[j][i])),
      );
    }
    let levels: number[] | null = null;
    const contours = params.get("contours");
    if (contours !== null) {
      const n = parseInt(contours, 10);
      const finite = losses.flat().filter((v): v is number => v !== null);
      const lo = Math.min(...finite);
      const hi = Math.max(...finite);
      levels =
        lo === hi
          ? [lo]
          : Array.from({ length: n }, (_, k) => lo + ((hi - lo) * (k + 1)) / (n + 1));
    }
    return {
      id,
      x_values: grid.x,
      y_values: grid.y,
      losses,
      contour_levels: levels,
      clip_radius: clipRadius,
    };
  }

  /** fetch-compatible entry point. */
  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const [path, query] = url.split("?");
    const params = new URLSearchParams(query ?? "");
    try {
      if (path === "/api/experiments" && init?.method === "POST") {
        const body = typeof init.body === "string" ? init.body : await new Response(init.body).text();
        return json(201, this.upload(body));
      }
      if (path === "/api/experiments/from-url" && init?.method === "POST") {
        const { url: remote } = JSON.parse(String(init.body));
        const csv = this.urls.get(remote);
        if (csv === undefined) throw new BackendError(502, `fetch failed: ${remote}`);
        return json(201, this.upload(csv));
      }
      if (path === "/api/experiments") {
        return json(200, [...this.grids.keys()].map((id) => this.entry(id)));
      }
      const gridMatch = path.match(/^\/api\/experiments\/([^/]+)\/grid$/);
      if (gridMatch) {
        return json(200, this.gridPayload(decodeURIComponent(gridMatch[1]), params));
      }
      throw new BackendError(404, `no route for ${url}`);
    } catch (err) {
      if (err instanceof BackendError) {
        return json(err.status, { detail: err.detail });
      }
      throw err;
    }
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function makeCsv(id: string, values: number[][], xs: number[], ys: number[]): string {
  const rows = ["id,x,y,loss"];
  for (let j = 0; j < ys.length; j++) {
    for (let i = 0; i < xs.length; i++) {
      rows.push(`${id},${xs[i]},${ys[j]},${values[j][i]}`);
    }
  }
  return rows.join("\n") + "\n";
}

/** Deterministic scheduler standing in for requestAnimationFrame. */
export class ManualFrames {
  private queue: (() => void)[] = [];

  schedule = (cb: () => void): void => {
    this.queue.push(cb);
  };

  /** Run one animation frame. */
  flush(): void {
    const pending = this.queue;
    this.queue = [];
    for (const cb of pending) cb();
  }

  get pending(): number {
    return this.queue.length;
  }
}
