import { Point } from "./viewport";

export const MAX_LASSO_VERTICES = 256;

/**
 * Thin a freehand pointer path down to at most `maxVertices` vertices,
 * keeping the first and last sample and dropping consecutive duplicates.
 */
export function downsamplePath(path: readonly Point[], maxVertices = MAX_LASSO_VERTICES): Point[] {
  const deduped: Point[] = [];
  for (const p of path) {
    const last = deduped[deduped.length - 1];
    if (!last || last[0] !== p[0] || last[1] !== p[1]) {
      deduped.push([p[0], p[1]]);
    }
  }
  if (deduped.length <= maxVertices) return deduped;

  const out: Point[] = [];
  const step = (deduped.length - 1) / (maxVertices - 1);
  for (let i = 0; i < maxVertices; i++) {
    out.push(deduped[Math.round(i * step)]);
  }
  return out;
}

/** A freehand lasso needs at least a triangle to enclose anything. */
export function isUsablePolygon(path: readonly Point[]): boolean {
  return path.length >= 3;
}
