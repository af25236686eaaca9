export type Point = [number, number];

/**
 * Pan/zoom transform between data space and screen pixels.
 *
 * Screen x grows right, screen y grows down; data y is flipped so the
 * map reads like a plot. Hit-testing stays in data space, so zooming
 * never changes which point sits under the cursor.
 */
export class Viewport {
  scale = 1;
  offsetX = 0;
  offsetY = 0;

  constructor(
    public width: number,
    public height: number,
  ) {}

  /** Fit the given data extent into the canvas with a relative margin. */
  fitTo(points: readonly Point[], margin = 0.05): void {
    if (points.length === 0) return;
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    for (const [x, y] of points) {
      minX = Math.min(minX, x);
      maxX = Math.max(maxX, x);
      minY = Math.min(minY, y);
      maxY = Math.max(maxY, y);
    }
    const spanX = (maxX - minX) || 1;
    const spanY = (maxY - minY) || 1;
    const usable = 1 - 2 * margin;
    this.scale = Math.min((this.width * usable) / spanX, (this.height * usable) / spanY);
    const cx = (minX + maxX) / 2;
    const cy = (minY + maxY) / 2;
    this.offsetX = this.width / 2 - this.scale * cx;
    this.offsetY = this.height / 2 + this.scale * cy;
  }

  toScreen([x, y]: Point): Point {
    return [this.scale * x + this.offsetX, this.offsetY - this.scale * y];
  }

  toData([sx, sy]: Point): Point {
    return [(sx - this.offsetX) / this.scale, (this.offsetY - sy) / this.scale];
  }

  panBy(dxScreen: number, dyScreen: number): void {
    this.offsetX += dxScreen;
    this.offsetY += dyScreen;
  }

  /** Zoom by `factor` keeping the data point under (sx, sy) fixed. */
  zoomAt(sx: number, sy: number, factor: number): void {
    const anchor = this.toData([sx, sy]);
    this.scale *= factor;
    const [ax, ay] = anchor;
    this.offsetX = sx - this.scale * ax;
    this.offsetY = sy + this.scale * ay;
  }
}
