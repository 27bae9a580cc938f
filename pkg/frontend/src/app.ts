/** Orchestrator: wires the state store, the REST client, the renderer, and
 * the control-panel DOM together. */

import { ApiClient, ApiError } from "./api";
import { ModebarAction, PlotRenderer } from "./plotAdapter";
import { AppStore } from "./state";
import { rangesDiffer } from "./surface";
import { renderTable } from "./table";
import { Camera, camerasEqual, GlobalControl, GridPayload, PlotState } from "./types";

function variantKey(plot: PlotState): string {
  return `${plot.id}|clip=${plot.clipOn}|contours=${plot.contoursOn}`;
}

export class App {
  readonly store: AppStore;
  private api: ApiClient;
  private renderer: PlotRenderer;

  private tableHost!: HTMLElement;
  private bannerHost!: HTMLElement;
  private badgeHost!: HTMLElement;
  private plotsHost!: HTMLElement;
  private buttons = new Map<GlobalControl | "home" | "load", HTMLButtonElement>();
  private dialog!: HTMLElement;

  private gridCache = new Map<string, GridPayload>();
  private inflight = new Set<string>();
  private hosts = new Map<string, HTMLElement>();
  private renderedVariant = new Map<string, string>();
  private pushedCamera = new Map<string, Camera>();
  private retryable = false;

  constructor(root: HTMLElement, api: ApiClient, renderer: PlotRenderer, store?: AppStore) {
    this.api = api;
    this.renderer = renderer;
    this.store = store ?? new AppStore();
    this.buildDom(root);
    this.store.subscribe(() => this.render());
  }

  async boot(): Promise<void> {
    await this.refreshExperiments();
  }

  async refreshExperiments(): Promise<void> {
    try {
      const entries = await this.api.listExperiments();
      this.retryable = false;
      if (this.store.message?.startsWith("failed to load experiments")) {
        this.store.setMessage(null);
      }
      this.store.setExperiments(entries);
    } catch (err) {
      this.retryable = true;
      this.store.setMessage(`failed to load experiments: ${(err as Error).message}`);
    }
  }

  toggleExperiment(id: string, checked: boolean): void {
    if (checked) {
      this.store.select(id);
    } else {
      this.store.deselect(id);
    }
  }

  async loadFromFile(content: Blob | string): Promise<boolean> {
    try {
      await this.api.uploadCsv(content);
    } catch (err) {
      this.showUploadError(err);
      return false;
    }
    this.store.setMessage(null);
    await this.refreshExperiments();
    return true;
  }

  async loadFromUrl(url: string): Promise<boolean> {
    try {
      await this.api.uploadFromUrl(url);
    } catch (err) {
      this.showUploadError(err);
      return false;
    }
    this.store.setMessage(null);
    await this.refreshExperiments();
    return true;
  }

  private showUploadError(err: unknown): void {
    // surface the server's detail verbatim
    const detail = err instanceof ApiError ? err.message : `upload failed: ${err}`;
    this.retryable = false;
    this.store.setMessage(detail);
  }

  handleModebar(id: string, action: ModebarAction): void {
    if (action === "home") {
      this.store.homePlot(id);
    } else {
      this.store.overrideControl(id, action);
    }
  }

  // --- DOM ---

  private buildDom(root: HTMLElement): void {
    root.textContent = "";
    const panel = document.createElement("aside");
    panel.className = "control-panel";
    this.bannerHost = document.createElement("div");
    this.bannerHost.className = "banner";
    this.bannerHost.hidden = true;
    this.badgeHost = document.createElement("div");
    this.badgeHost.className = "badge";
    this.badgeHost.hidden = true;
    this.badgeHost.textContent = "plotted experiments use different x-y ranges";
    this.tableHost = document.createElement("div");
    this.tableHost.className = "table-host";
    const buttonRow = document.createElement("div");
    buttonRow.className = "button-row";
    const actions: [GlobalControl | "home" | "load", string][] = [
      ["contours", "Contours"],
      ["sync", "Sync"],
      ["load", "Load"],
      ["home", "Home"],
      ["clip", "Clip"],
    ];
    for (const [action, label] of actions) {
      const button = document.createElement("button");
      button.textContent = label;
      button.dataset.action = action;
      button.addEventListener("click", () => this.handleButton(action));
      this.buttons.set(action, button);
      buttonRow.appendChild(button);
    }
    this.dialog = this.buildLoadDialog();
    panel.append(this.bannerHost, this.badgeHost, this.tableHost, buttonRow, this.dialog);

    this.plotsHost = document.createElement("main");
    this.plotsHost.className = "plot-canvas";
    root.append(panel, this.plotsHost);
  }

  private buildLoadDialog(): HTMLElement {
    const dialog = document.createElement("div");
    dialog.className = "load-dialog";
    dialog.hidden = true;

    const fileInput = document.createElement("input");
    fileInput.type = "file";
    fileInput.accept = ".csv,text/csv";
    fileInput.dataset.role = "file";
    fileInput.addEventListener("change", async () => {
      const file = fileInput.files?.[0];
      if (file && (await this.loadFromFile(file))) dialog.hidden = true;
    });

    const urlInput = document.createElement("input");
    urlInput.type = "url";
    urlInput.placeholder = "https://host/landscape.csv";
    urlInput.dataset.role = "url";
    const urlButton = document.createElement("button");
    urlButton.textContent = "Fetch URL";
    urlButton.dataset.role = "fetch-url";
    urlButton.addEventListener("click", async () => {
      if (urlInput.value && (await this.loadFromUrl(urlInput.value))) dialog.hidden = true;
    });

    const close = document.createElement("button");
    close.textContent = "Close";
    close.dataset.role = "close";
    close.addEventListener("click", () => (dialog.hidden = true));

    dialog.append(fileInput, urlInput, urlButton, close);
    return dialog;
  }

  private handleButton(action: GlobalControl | "home" | "load"): void {
    if (action === "load") {
      this.dialog.hidden = !this.dialog.hidden;
    } else if (action === "home") {
      this.store.homeAll();
    } else {
      this.store.toggleGlobal(action);
    }
  }

  // --- rendering ---

  render(): void {
    renderTable(
      this.tableHost,
      this.store.experiments,
      (id) => this.store.isSelected(id),
      (id, checked) => this.toggleExperiment(id, checked),
    );
    this.bannerHost.hidden = this.store.message === null;
    this.bannerHost.textContent = this.store.message ?? "";
    if (!this.bannerHost.hidden && this.retryable) {
      const retry = document.createElement("button");
      retry.textContent = "Retry";
      retry.dataset.role = "retry";
      retry.addEventListener("click", () => void this.refreshExperiments());
      this.bannerHost.append(" ", retry);
    }
    for (const control of ["contours", "sync", "clip"] as GlobalControl[]) {
      this.buttons.get(control)?.classList.toggle("active", this.store.globals[control]);
    }
    this.reconcilePlots();
  }

  private reconcilePlots(): void {
    const active = this.store.activePlots();
    const activeIds = new Set(active.map((p) => p.id));
    for (const [id, host] of [...this.hosts]) {
      if (!activeIds.has(id)) {
        this.renderer.remove(id);
        host.remove();
        this.hosts.delete(id);
        this.renderedVariant.delete(id);
        this.pushedCamera.delete(id);
      }
    }
    const grids: GridPayload[] = [];
    for (const plot of active) {
      const key = variantKey(plot);
      const grid = this.gridCache.get(key);
      if (grid === undefined) {
        this.fetchGrid(plot.id, key, { clip: plot.clipOn, contours: plot.contoursOn });
        continue;
      }
      grids.push(grid);
      this.mountPlot(plot, key, grid);
    }
    this.badgeHost.hidden = !rangesDiffer(grids);
  }

  private fetchGrid(id: string, key: string, opts: { clip: boolean; contours: boolean }): void {
    if (this.inflight.has(key)) return;
    this.inflight.add(key);
    this.api
      .getGrid(id, opts)
      .then((grid) => {
        this.gridCache.set(key, grid);
        this.render();
      })
      .catch((err) => {
        this.markPlotFailed(id, err as Error);
      })
      .finally(() => this.inflight.delete(key));
  }

  /** A malformed grid only takes down its own panel. */
  private markPlotFailed(id: string, err: Error): void {
    const host = this.ensureHost(id);
    host.textContent = "";
    const card = document.createElement("div");
    card.className = "plot-error";
    card.textContent = `${id}: ${err.message}`;
    host.appendChild(card);
  }

  private ensureHost(id: string): HTMLElement {
    let host = this.hosts.get(id);
    if (host === undefined) {
      host = document.createElement("div");
      host.className = "plot-cell";
      host.dataset.id = id;
      this.plotsHost.appendChild(host);
      this.hosts.set(id, host);
    }
    return host;
  }

  private mountPlot(plot: PlotState, key: string, grid: GridPayload): void {
    const host = this.ensureHost(plot.id);
    const entry = this.store.experiments.find((e) => e.id === plot.id);
    const title = entry?.name ?? plot.id;
    if (this.renderedVariant.get(plot.id) !== key) {
      this.renderer.render(host, plot.id, title, grid, plot.contoursOn, plot.camera, {
        onCamera: (camera) => {
          this.pushedCamera.set(plot.id, camera);
          this.store.cameraChanged(plot.id, camera);
        },
        onAction: (action) => this.handleModebar(plot.id, action),
      });
      this.renderedVariant.set(plot.id, key);
      this.pushedCamera.set(plot.id, plot.camera);
      return;
    }
    const pushed = this.pushedCamera.get(plot.id);
    if (pushed === undefined || !camerasEqual(pushed, plot.camera)) {
      this.renderer.setCamera(plot.id, plot.camera);
      this.pushedCamera.set(plot.id, plot.camera);
    }
  }
}
