import { ApiClient, ApiRequestError } from "./api";
import { downsamplePath, isUsablePolygon } from "./lasso";
import { drawScene } from "./render";
import { AppStore } from "./store";
import { ToaTimer } from "./timer";
import { Point, Viewport } from "./viewport";

type Tool = "pan" | "lasso";

const api = new ApiClient("");
const store = new AppStore(api);
const timer = new ToaTimer();

const canvas = document.getElementById("plot") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const viewport = new Viewport(canvas.width, canvas.height);

const statusEl = document.getElementById("status")!;
const poolEl = document.getElementById("pool")!;
const timerEl = document.getElementById("timer")!;
const paletteEl = document.getElementById("palette")!;
const metricsEl = document.getElementById("metrics")!;
const classInput = document.getElementById("class-name") as HTMLInputElement;
const onlyUnlabeledInput = document.getElementById("only-unlabeled") as HTMLInputElement;
const thumbsInput = document.getElementById("show-thumbs") as HTMLInputElement;
const manifestInput = document.getElementById("manifest-path") as HTMLInputElement;
const toolButtons = {
  pan: document.getElementById("tool-pan") as HTMLButtonElement,
  lasso: document.getElementById("tool-lasso") as HTMLButtonElement,
};

let tool: Tool = "lasso";
let dragging = false;
let lastPointer: Point | null = null;
let lassoScreenPath: Point[] = [];
const thumbnails = new Map<string, HTMLImageElement>();

function setTool(next: Tool): void {
  tool = next;
  toolButtons.pan.classList.toggle("active", next === "pan");
  toolButtons.lasso.classList.toggle("active", next === "lasso");
  canvas.style.cursor = next === "pan" ? "grab" : "crosshair";
}

function render(): void {
  drawScene(ctx, viewport, store, {
    showThumbnails: thumbsInput.checked,
    thumbnails,
    lassoPath: lassoScreenPath.length ? lassoScreenPath : null,
  });
  poolEl.textContent = `${store.labeledCount} labeled / ${store.unlabeledCount} unlabeled (round ${store.round})`;
  paletteEl.innerHTML = "";
  for (const [name, color] of store.palette) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.style.background = color;
    chip.textContent = name;
    chip.onclick = () => {
      classInput.value = name;
    };
    paletteEl.appendChild(chip);
  }
}

function setStatus(text: string): void {
  statusEl.textContent = text;
}

function loadThumbnails(): void {
  for (const point of store.points) {
    if (point.thumbnail_url && !thumbnails.has(point.clip_id)) {
      const img = new Image();
      img.src = point.thumbnail_url;
      img.onload = () => render();
      thumbnails.set(point.clip_id, img);
    }
  }
}

canvas.addEventListener("pointerdown", (event) => {
  dragging = true;
  canvas.setPointerCapture(event.pointerId);
  const p: Point = [event.offsetX, event.offsetY];
  if (tool === "lasso") {
    lassoScreenPath = [p];
  } else {
    lastPointer = p;
  }
});

canvas.addEventListener("pointermove", (event) => {
  if (!dragging) return;
  const p: Point = [event.offsetX, event.offsetY];
  if (tool === "lasso") {
    lassoScreenPath.push(p);
  } else if (lastPointer) {
    viewport.panBy(p[0] - lastPointer[0], p[1] - lastPointer[1]);
    lastPointer = p;
  }
  render();
});

canvas.addEventListener("pointerup", async () => {
  dragging = false;
  lastPointer = null;
  if (tool !== "lasso" || !isUsablePolygon(lassoScreenPath)) {
    lassoScreenPath = [];
    render();
    return;
  }
  const polygon = downsamplePath(lassoScreenPath).map((p) => viewport.toData(p));
  lassoScreenPath = [];
  const className = classInput.value.trim();
  if (!className) {
    setStatus("enter a class name before lassoing");
    render();
    return;
  }
  try {
    const response = await store.applyLasso(polygon, className, onlyUnlabeledInput.checked);
    if (response) {
      setStatus(`labeled ${response.affected_clip_ids.length} clips as "${className}"`);
    }
  } catch (error) {
    setStatus(error instanceof ApiRequestError ? error.message : String(error));
  }
  render();
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
  viewport.zoomAt(event.offsetX, event.offsetY, factor);
  render();
});

document.getElementById("tool-pan")!.addEventListener("click", () => setTool("pan"));
document.getElementById("tool-lasso")!.addEventListener("click", () => setTool("lasso"));

document.getElementById("fit")!.addEventListener("click", () => {
  viewport.fitTo(store.dataPoints());
  render();
});

thumbsInput.addEventListener("change", () => render());

document.getElementById("advance")!.addEventListener("click", async () => {
  const seconds = timer.drain();
  setStatus("advancing round; embedding recompute running...");
  try {
    const finished = await store.advanceRound(seconds, manifestInput.value.trim() || undefined);
    if (finished.state === "failed") {
      setStatus(`round job failed: ${finished.message}`);
    } else {
      viewport.fitTo(store.dataPoints());
      loadThumbnails();
      setStatus(`round ${store.round} ready (posted ${seconds.toFixed(0)}s ToA)`);
    }
  } catch (error) {
    setStatus(error instanceof ApiRequestError ? error.message : String(error));
  }
  timer.start();
  render();
});

document.getElementById("refresh-metrics")!.addEventListener("click", async () => {
  try {
    const report = await api.getMetrics();
    const fmt = (v: number | null, pct = true) =>
      v === null ? "-" : pct ? `${(100 * v).toFixed(1)}%` : String(v);
    metricsEl.textContent =
      `4-NN ${fmt(report.knn_accuracy)} | homogeneity ${fmt(report.homogeneity)} | ` +
      `completeness ${fmt(report.completeness)} | time gain ${fmt(report.time_gain, false)}x`;
  } catch (error) {
    metricsEl.textContent = String(error);
  }
});

setInterval(() => {
  timerEl.textContent = `${timer.elapsedSeconds().toFixed(0)}s`;
  // the timer only counts oracle-active time, never recompute time
  if (store.activeJob && timer.running) timer.pause();
  else if (!store.activeJob && !timer.running && !store.busy) timer.start();
}, 500);

async function bootstrap(): Promise<void> {
  setTool("lasso");
  setStatus("loading session...");
  await store.refreshSession();
  for (;;) {
    try {
      await store.refreshEmbedding();
      break;
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 409) {
        setStatus("embedding is being computed...");
        await new Promise((resolve) => setTimeout(resolve, 750));
        continue;
      }
      throw error;
    }
  }
  viewport.fitTo(store.dataPoints());
  loadThumbnails();
  timer.start();
  setStatus("ready: draw a lasso around a cluster and assign a class");
  render();
}

store.onChange(render);
bootstrap().catch((error) => setStatus(String(error)));
