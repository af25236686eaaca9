import { ApiClient } from "./api";
import { Point } from "./viewport";
import {
  EmbeddingPoint,
  JobStatus,
  LabelResponse,
  SessionSummary,
  UNLABELED,
} from "./types";

export const NEUTRAL_COLOR = "#9aa0a6";

export interface StoreListener {
  (): void;
}

/**
 * Client-side session state. The server is the single source of truth:
 * point labels change only from server responses, never from local
 * geometry, so the plot always shows exactly what the server decided.
 */
export class AppStore {
  points: EmbeddingPoint[] = [];
  round = 0;
  labeledCount = 0;
  unlabeledCount = 0;
  palette = new Map<string, string>();
  toaCumulativeSeconds = 0;
  activeClass = "";
  activeJob: JobStatus | null = null;
  lastError = "";

  private mutationInFlight = false;
  private listeners: StoreListener[] = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: StoreListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get busy(): boolean {
    return this.mutationInFlight;
  }

  colorOf(label: string): string {
    if (label === UNLABELED) return NEUTRAL_COLOR;
    return this.palette.get(label) ?? NEUTRAL_COLOR;
  }

  dataPoints(): Point[] {
    return this.points.map((p) => [p.x, p.y]);
  }

  async refreshSession(): Promise<SessionSummary> {
    const summary = await this.api.getSession();
    this.round = summary.round;
    this.labeledCount = summary.labeled_count;
    this.unlabeledCount = summary.unlabeled_count;
    this.toaCumulativeSeconds = summary.toa_cumulative_seconds;
    this.palette = new Map(summary.class_palette);
    this.activeJob = summary.active_job;
    this.notify();
    return summary;
  }

  async refreshEmbedding(): Promise<void> {
    const payload = await this.api.getEmbedding();
    this.points = payload.points;
    this.round = payload.round;
    this.notify();
  }

  /**
   * Send a lasso polygon (data-space vertices) with a class; recolor
   * exactly the clips the server reports back. One mutation in flight
   * at a time.
   */
  async applyLasso(
    polygon: Point[],
    className: string,
    onlyUnlabeled = false,
  ): Promise<LabelResponse | null> {
    if (this.mutationInFlight || !className) return null;
    this.mutationInFlight = true;
    try {
      const response = await this.api.postLabels({
        class_name: className,
        polygon: polygon.map(([x, y]) => [x, y] as [number, number]),
        only_unlabeled: onlyUnlabeled,
      });
      this.applyLabelResponse(response, className);
      return response;
    } finally {
      this.mutationInFlight = false;
      this.notify();
    }
  }

  applyLabelResponse(response: LabelResponse, className: string): void {
    const affected = new Set(response.affected_clip_ids);
    for (const point of this.points) {
      if (affected.has(point.clip_id)) {
        point.current_label = className;
      }
    }
    if (response.class_color) {
      this.palette.set(className, response.class_color);
    }
    this.labeledCount = response.labeled_count;
    this.unlabeledCount = response.unlabeled_count;
  }

  /**
   * Close the round: post accumulated ToA (and an optional refreshed
   * manifest), wait for the re-embed job, then reload everything.
   */
  async advanceRound(toaSeconds: number, manifestPath?: string): Promise<JobStatus> {
    if (this.mutationInFlight) throw new Error("another mutation is in flight");
    this.mutationInFlight = true;
    try {
      const job = await this.api.postRound({
        manifest_path: manifestPath || null,
        toa_seconds: toaSeconds,
      });
      this.activeJob = job;
      this.notify();
      const finished = await this.api.waitForJob(job.job_id);
      this.activeJob = null;
      if (finished.state === "failed") {
        this.lastError = finished.message;
        this.notify();
        return finished;
      }
      await this.refreshEmbedding();
      await this.refreshSession();
      return finished;
    } finally {
      this.mutationInFlight = false;
      this.notify();
    }
  }
}
