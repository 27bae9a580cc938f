/** UI state machine: plot selection, global controls, per-plot overrides,
 * and rAF-coalesced camera synchronization. No DOM access here, so the
 * whole model is unit-testable. */

import {
  Camera,
  cloneCamera,
  DEFAULT_CAMERA,
  ExperimentEntry,
  GlobalControl,
  GlobalControls,
  MAX_PLOTS,
  PlotState,
} from "./types";

export type Scheduler = (callback: () => void) => void;

export interface SelectResult {
  ok: boolean;
  message?: string;
}

const defaultScheduler: Scheduler =
  typeof requestAnimationFrame === "function"
    ? (cb) => requestAnimationFrame(() => cb())
    : (cb) => setTimeout(cb, 0);

export class AppStore {
  experiments: ExperimentEntry[] = [];
  globals: GlobalControls = { contours: true, sync: false, clip: false };
  plots = new Map<string, PlotState>();
  lastInteractedId: string | null = null;
  message: string | null = null;

  private listeners = new Set<() => void>();
  private schedule: Scheduler;
  private pendingBroadcast: string | null = null;

  constructor(schedule: Scheduler = defaultScheduler) {
    this.schedule = schedule;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  setExperiments(entries: ExperimentEntry[]): void {
    this.experiments = entries;
    const known = new Set(entries.map((e) => e.id));
    for (const id of [...this.plots.keys()]) {
      if (!known.has(id)) this.plots.delete(id);
    }
    this.emit();
  }

  setMessage(message: string | null): void {
    this.message = message;
    this.emit();
  }

  isSelected(id: string): boolean {
    return this.plots.has(id);
  }

  activePlots(): PlotState[] {
    return [...this.plots.values()];
  }

  /** Check a table row; the seventh simultaneous plot is refused. */
  select(id: string): SelectResult {
    if (this.plots.has(id)) return { ok: true };
    if (this.plots.size >= MAX_PLOTS) {
      const message = `at most ${MAX_PLOTS} experiments can be plotted at once; uncheck one first`;
      this.message = message;
      this.emit();
      return { ok: false, message };
    }
    this.plots.set(id, {
      id,
      camera: cloneCamera(DEFAULT_CAMERA),
      contoursOn: this.globals.contours,
      clipOn: this.globals.clip,
      syncOn: this.globals.sync,
      overrides: { contours: false, sync: false, clip: false },
    });
    this.message = null;
    this.emit();
    return { ok: true };
  }

  deselect(id: string): void {
    this.plots.delete(id);
    if (this.lastInteractedId === id) this.lastInteractedId = null;
    this.emit();
  }

  private applyControl(plot: PlotState, control: GlobalControl, value: boolean): void {
    if (control === "contours") plot.contoursOn = value;
    else if (control === "clip") plot.clipOn = value;
    else plot.syncOn = value;
  }

  /** Toggle a global; applies to every plot that has not locally overridden
   * the same control (one atomic pass, single emit). */
  setGlobal(control: GlobalControl, value: boolean): void {
    this.globals[control] = value;
    for (const plot of this.plots.values()) {
      if (!plot.overrides[control]) this.applyControl(plot, control, value);
    }
    if (control === "sync" && value) this.adoptLastInteractedCamera();
    this.emit();
  }

  toggleGlobal(control: GlobalControl): void {
    this.setGlobal(control, !this.globals[control]);
  }

  /** When sync turns on with divergent cameras, every participating plot
   * adopts the most recently interacted camera. */
  private adoptLastInteractedCamera(): void {
    const source = this.lastInteractedId && this.plots.get(this.lastInteractedId);
    if (!source || !source.syncOn) return;
    for (const plot of this.plots.values()) {
      if (plot.syncOn && plot.id !== source.id) plot.camera = cloneCamera(source.camera);
    }
  }

  /** Per-plot modebar action: flips one control for one plot and records the
   * override, shielding it from global toggles until its Home reset. */
  overrideControl(id: string, control: GlobalControl): void {
    const plot = this.plots.get(id);
    if (!plot) return;
    plot.overrides[control] = true;
    const current =
      control === "contours" ? plot.contoursOn : control === "clip" ? plot.clipOn : plot.syncOn;
    this.applyControl(plot, control, !current);
    this.emit();
  }

  /** Per-plot Home: default camera, overrides cleared, globals re-adopted. */
  homePlot(id: string): void {
    const plot = this.plots.get(id);
    if (!plot) return;
    this.resetPlot(plot);
    this.emit();
  }

  /** Global Home: every plot back to the default view, all overrides gone. */
  homeAll(): void {
    for (const plot of this.plots.values()) this.resetPlot(plot);
    this.emit();
  }

  private resetPlot(plot: PlotState): void {
    plot.camera = cloneCamera(DEFAULT_CAMERA);
    plot.overrides = { contours: false, sync: false, clip: false };
    plot.contoursOn = this.globals.contours;
    plot.clipOn = this.globals.clip;
    plot.syncOn = this.globals.sync;
  }

  /** A user moved a plot's camera. Broadcast to the other participating
   * plots is coalesced to one update per animation frame. */
  cameraChanged(id: string, camera: Camera): void {
    const plot = this.plots.get(id);
    if (!plot) return;
    plot.camera = cloneCamera(camera);
    this.lastInteractedId = id;
    if (plot.syncOn) {
      const first = this.pendingBroadcast === null;
      this.pendingBroadcast = id;
      if (first) {
        this.schedule(() => this.flushBroadcast());
      }
    }
    this.emit();
  }

  private flushBroadcast(): void {
    const sourceId = this.pendingBroadcast;
    this.pendingBroadcast = null;
    const source = sourceId ? this.plots.get(sourceId) : undefined;
    if (!source || !source.syncOn) return;
    for (const plot of this.plots.values()) {
      if (plot.syncOn && plot.id !== source.id) plot.camera = cloneCamera(source.camera);
    }
    this.emit();
  }
}
