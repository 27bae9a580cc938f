import { describe, expect, it } from "vitest";

import { AppStore } from "../src/state";
import { Camera, DEFAULT_CAMERA, ExperimentEntry, MAX_PLOTS } from "../src/types";
import { ManualFrames } from "./helpers";

function entries(n: number): ExperimentEntry[] {
  return Array.from({ length: n }, (_, i) => ({
    id: `e${i}`,
    name: `exp ${i}`,
    created_at: "",
    metadata: {},
    stats: {
      min_loss: 0, max_loss: 1, mean_loss: 0.5, center_loss: null,
      argmin_x: 0, argmin_y: 0, finite_count: 4, masked_count: 0,
    },
  }));
}

function camera(x: number): Camera {
  return { eye: { x, y: -x, z: 1 }, center: { x: 0, y: 0, z: 0 }, up: { x: 0, y: 0, z: 1 } };
}

describe("selection", () => {
  it("caps active plots at six and refuses the seventh with a message", () => {
    const store = new AppStore(new ManualFrames().schedule);
    store.setExperiments(entries(8));
    for (let i = 0; i < MAX_PLOTS; i++) {
      expect(store.select(`e${i}`).ok).toBe(true);
    }
    const refused = store.select("e6");
    expect(refused.ok).toBe(false);
    expect(refused.message).toMatch(/at most 6/);
    expect(store.message).toMatch(/at most 6/);
    expect(store.activePlots()).toHaveLength(6);
    store.deselect("e0");
    expect(store.select("e6").ok).toBe(true);
  });

  it("drops plots whose experiments disappear from the server", () => {
    const store = new AppStore(new ManualFrames().schedule);
    store.setExperiments(entries(3));
    store.select("e1");
    store.setExperiments(entries(1));
    expect(store.isSelected("e1")).toBe(false);
  });
});

describe("global controls and overrides", () => {
  it("applies a global toggle to every non-overridden plot", () => {
    const store = new AppStore(new ManualFrames().schedule);
    store.setExperiments(entries(3));
    store.select("e0");
    store.select("e1");
    expect(store.plots.get("e0")!.clipOn).toBe(false);
    store.setGlobal("clip", true);
    expect(store.plots.get("e0")!.clipOn).toBe(true);
    expect(store.plots.get("e1")!.clipOn).toBe(true);
  });

  it("an override shields a plot from later global toggles until Home", () => {
    const store = new AppStore(new ManualFrames().schedule);
    store.setExperiments(entries(2));
    store.select("e0");
    store.select("e1");
    // contours default on; override e0 off
    store.overrideControl("e0", "contours");
    expect(store.plots.get("e0")!.contoursOn).toBe(false);
    store.setGlobal("contours", false);
    store.setGlobal("contours", true);
    expect(store.plots.get("e1")!.contoursOn).toBe(true);
    expect(store.plots.get("e0")!.contoursOn).toBe(false); // survived both toggles
    store.homePlot("e0");
    expect(store.plots.get("e0")!.contoursOn).toBe(true); // re-adopts the global
    store.setGlobal("contours", false);
    expect(store.plots.get("e0")!.contoursOn).toBe(false);
  });

  it("global Home resets cameras and clears every override", () => {
    const store = new AppStore(new ManualFrames().schedule);
    store.setExperiments(entries(2));
    store.select("e0");
    store.select("e1");
    store.overrideControl("e0", "clip");
    store.cameraChanged("e1", camera(9));
    store.homeAll();
    for (const plot of store.activePlots()) {
      expect(plot.camera).toEqual(DEFAULT_CAMERA);
      expect(plot.overrides).toEqual({ contours: false, sync: false, clip: false });
    }
  });
});

describe("camera sync", () => {
  it("defaults off: rotating one plot leaves the others alone", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(2));
    store.select("e0");
    store.select("e1");
    store.cameraChanged("e0", camera(5));
    frames.flush();
    expect(store.plots.get("e1")!.camera).toEqual(DEFAULT_CAMERA);
  });

  it("broadcasts within one frame when sync is on", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(3));
    store.select("e0");
    store.select("e1");
    store.select("e2");
    store.setGlobal("sync", true);
    store.cameraChanged("e0", camera(5));
    expect(store.plots.get("e1")!.camera).toEqual(DEFAULT_CAMERA); // not yet
    frames.flush(); // one animation frame
    expect(store.plots.get("e1")!.camera).toEqual(camera(5));
    expect(store.plots.get("e2")!.camera).toEqual(camera(5));
  });

  it("coalesces a burst of moves into a single broadcast frame", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(2));
    store.select("e0");
    store.select("e1");
    store.setGlobal("sync", true);
    for (let i = 1; i <= 10; i++) store.cameraChanged("e0", camera(i));
    expect(frames.pending).toBe(1);
    frames.flush();
    expect(store.plots.get("e1")!.camera).toEqual(camera(10));
  });

  it("turning sync on with divergent cameras adopts the last-interacted one", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(3));
    store.select("e0");
    store.select("e1");
    store.select("e2");
    store.cameraChanged("e0", camera(2));
    store.cameraChanged("e1", camera(7)); // most recent interaction
    frames.flush();
    store.setGlobal("sync", true);
    expect(store.plots.get("e0")!.camera).toEqual(camera(7));
    expect(store.plots.get("e2")!.camera).toEqual(camera(7));
  });

  it("a sync-overridden plot neither receives nor sends camera moves", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(3));
    store.select("e0");
    store.select("e1");
    store.select("e2");
    store.setGlobal("sync", true);
    store.overrideControl("e2", "sync"); // opts out
    store.cameraChanged("e0", camera(4));
    frames.flush();
    expect(store.plots.get("e1")!.camera).toEqual(camera(4));
    expect(store.plots.get("e2")!.camera).toEqual(DEFAULT_CAMERA);
    store.cameraChanged("e2", camera(8)); // opted-out plot moves
    frames.flush();
    expect(store.plots.get("e0")!.camera).toEqual(camera(4)); // unaffected
  });

  it("per-plot Home re-enrolls the plot in sync afterwards", () => {
    const frames = new ManualFrames();
    const store = new AppStore(frames.schedule);
    store.setExperiments(entries(2));
    store.select("e0");
    store.select("e1");
    store.setGlobal("sync", true);
    store.overrideControl("e1", "sync");
    store.homePlot("e1"); // clears the override, re-adopts global sync on
    store.cameraChanged("e0", camera(3));
    frames.flush();
    expect(store.plots.get("e1")!.camera).toEqual(camera(3));
  });
});
