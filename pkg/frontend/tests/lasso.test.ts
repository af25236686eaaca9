import { describe, expect, it } from "vitest";

import { downsamplePath, isUsablePolygon, MAX_LASSO_VERTICES } from "../src/lasso";
import { Point } from "../src/viewport";

describe("downsamplePath", () => {
  it("caps long freehand paths at the vertex budget", () => {
    const path: Point[] = [];
    for (let i = 0; i < 5000; i++) {
      path.push([Math.cos(i / 100), Math.sin(i / 100)]);
    }
    const out = downsamplePath(path);
    expect(out.length).toBeLessThanOrEqual(MAX_LASSO_VERTICES);
    expect(out[0]).toEqual(path[0]);
    expect(out[out.length - 1]).toEqual(path[path.length - 1]);
  });

  it("keeps short paths untouched", () => {
    const path: Point[] = [
      [0, 0],
      [1, 0],
      [1, 1],
    ];
    expect(downsamplePath(path)).toEqual(path);
  });

  it("drops consecutive duplicate samples", () => {
    const path: Point[] = [
      [0, 0],
      [0, 0],
      [1, 0],
      [1, 0],
      [1, 1],
    ];
    expect(downsamplePath(path)).toEqual([
      [0, 0],
      [1, 0],
      [1, 1],
    ]);
  });

  it("preserves path order under downsampling", () => {
    const path: Point[] = [];
    for (let i = 0; i < 1000; i++) path.push([i, 0]);
    const out = downsamplePath(path, 64);
    for (let i = 1; i < out.length; i++) {
      expect(out[i][0]).toBeGreaterThan(out[i - 1][0]);
    }
  });
});

describe("isUsablePolygon", () => {
  it("needs three vertices", () => {
    expect(isUsablePolygon([])).toBe(false);
    expect(
      isUsablePolygon([
        [0, 0],
        [1, 1],
      ]),
    ).toBe(false);
    expect(
      isUsablePolygon([
        [0, 0],
        [1, 1],
        [2, 0],
      ]),
    ).toBe(true);
  });
});
