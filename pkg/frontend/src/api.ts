/** Thin client over the service's REST API. */

import { CONTOUR_COUNT, ExperimentEntry, GridPayload } from "./types";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body?.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export class ApiClient {
  constructor(private fetcher: typeof fetch = fetch.bind(globalThis)) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetcher(path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return response;
  }

  async listExperiments(): Promise<ExperimentEntry[]> {
    const response = await this.request("/api/experiments");
    return response.json();
  }

  /** Grid with server-side clipping and contour levels baked in. */
  async getGrid(id: string, opts: { clip: boolean; contours: boolean }): Promise<GridPayload> {
    const params = new URLSearchParams();
    params.set("clip", opts.clip ? "auto" : "off");
    if (opts.contours) params.set("contours", String(CONTOUR_COUNT));
    const response = await this.request(
      `/api/experiments/${encodeURIComponent(id)}/grid?${params.toString()}`,
    );
    return response.json();
  }

  async uploadCsv(body: Blob | string): Promise<ExperimentEntry[]> {
    const response = await this.request("/api/experiments", {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body,
    });
    return response.json();
  }

  async uploadFromUrl(url: string): Promise<ExperimentEntry[]> {
    const response = await this.request("/api/experiments/from-url", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ url }),
    });
    return response.json();
  }
}
