import { AppStore } from "./store";
import { Point, Viewport } from "./viewport";

/** Structural subset of CanvasRenderingContext2D the renderer needs. */
export interface DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  drawImage(image: unknown, dx: number, dy: number, dw: number, dh: number): void;
}

export interface RenderOptions {
  pointRadius?: number;
  showThumbnails?: boolean;
  thumbnailSize?: number;
  thumbnails?: Map<string, unknown>;
  lassoPath?: Point[] | null;
}

export function drawScene(
  ctx: DrawContext,
  viewport: Viewport,
  store: AppStore,
  options: RenderOptions = {},
): void {
  const radius = options.pointRadius ?? 3.5;
  ctx.clearRect(0, 0, viewport.width, viewport.height);

  for (const point of store.points) {
    const [sx, sy] = viewport.toScreen([point.x, point.y]);
    if (sx < -radius || sy < -radius || sx > viewport.width + radius || sy > viewport.height + radius) {
      continue;
    }
    ctx.fillStyle = store.colorOf(point.current_label);
    ctx.beginPath();
    ctx.arc(sx, sy, radius, 0, Math.PI * 2);
    ctx.fill();
  }

  if (options.showThumbnails && options.thumbnails) {
    const size = options.thumbnailSize ?? 28;
    ctx.globalAlpha = 0.9;
    for (const point of store.points) {
      const image = options.thumbnails.get(point.clip_id);
      if (!image) continue;
      const [sx, sy] = viewport.toScreen([point.x, point.y]);
      ctx.drawImage(image, sx - size / 2, sy - size / 2, size, size);
    }
    ctx.globalAlpha = 1;
  }

  if (options.lassoPath && options.lassoPath.length >= 2) {
    ctx.strokeStyle = "#1a73e8";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const [x0, y0] = options.lassoPath[0];
    ctx.moveTo(x0, y0);
    for (const [x, y] of options.lassoPath.slice(1)) {
      ctx.lineTo(x, y);
    }
    ctx.closePath();
    ctx.stroke();
  }
}
