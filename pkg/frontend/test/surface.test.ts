import { describe, expect, it } from "vitest";

import { finiteRange, rangesDiffer, surfaceSpec } from "../src/surface";
import { GridPayload } from "../src/types";

function grid(partial: Partial<GridPayload>): GridPayload {
  return {
    id: "g",
    x_values: [-1, 0, 1],
    y_values: [-1, 0, 1],
    losses: [
      [1, 2, 3],
      [4, 5, 6],
      [7, 8, 9],
    ],
    contour_levels: null,
    clip_radius: null,
    ...partial,
  };
}

describe("finiteRange", () => {
  it("ignores masked entries", () => {
    expect(finiteRange([[null, 2], [8, null]])).toEqual({ min: 2, max: 8 });
  });

  it("is null for a fully masked grid", () => {
    expect(finiteRange([[null, null]])).toBeNull();
  });
});

describe("surfaceSpec", () => {
  it("keeps nulls as holes and normalizes color to the finite range", () => {
    const spec = surfaceSpec(grid({ losses: [[null, 2, 3], [4, 5, 6], [7, 8, 9]] }), false);
    expect(spec.z[0][0]).toBeNull();
    expect(spec.cmin).toBe(2);
    expect(spec.cmax).toBe(9);
    expect(spec.contours).toBeNull();
  });

  it("derives the contour sweep from server levels", () => {
    const spec = surfaceSpec(grid({ contour_levels: [1, 2, 3] }), true);
    expect(spec.contours).toEqual({ start: 1, end: 3, size: 1 });
  });

  it("handles a flat grid's single level", () => {
    const spec = surfaceSpec(grid({ contour_levels: [5] }), true);
    expect(spec.contours).toEqual({ start: 5, end: 5, size: 5 });
  });

  it("omits contours when toggled off even if levels came back", () => {
    const spec = surfaceSpec(grid({ contour_levels: [1, 2, 3] }), false);
    expect(spec.contours).toBeNull();
  });
});

describe("rangesDiffer", () => {
  it("is false for zero, one, or matching grids", () => {
    expect(rangesDiffer([])).toBe(false);
    expect(rangesDiffer([grid({})])).toBe(false);
    expect(rangesDiffer([grid({}), grid({ id: "other" })])).toBe(false);
  });

  it("flags differing x-y planes", () => {
    const other = grid({ id: "wide", x_values: [-2, 0, 2] });
    expect(rangesDiffer([grid({}), other])).toBe(true);
  });
});
