/** Wire types of the annotation server's JSON API. */

export const UNLABELED = "__unlabeled__";

export interface EmbeddingPoint {
  clip_id: string;
  x: number;
  y: number;
  current_label: string;
  thumbnail_url: string | null;
}

export interface EmbeddingPayload {
  round: number;
  points: EmbeddingPoint[];
}

export interface SessionSummary {
  round: number;
  clip_count: number;
  video_count: number;
  labeled_count: number;
  unlabeled_count: number;
  budget_seconds: number | null;
  toa_cumulative_seconds: number;
  toa_log: [number, number][];
  class_palette: [string, string][];
  state_hash: string;
  active_job: JobStatus | null;
}

export interface LabelRequest {
  class_name: string;
  clip_ids?: string[];
  polygon?: [number, number][];
  only_unlabeled?: boolean;
}

export interface LabelResponse {
  affected_clip_ids: string[];
  labeled_count: number;
  unlabeled_count: number;
  class_color: string | null;
}

export interface RoundRequest {
  manifest_path?: string | null;
  toa_seconds?: number | null;
}

export interface JobStatus {
  job_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  message: string;
}

export interface MetricsReport {
  knn_k: number | null;
  knn_accuracy: number | null;
  kmeans_k: number | null;
  homogeneity: number | null;
  completeness: number | null;
  time_gain: number | null;
  per_class_counts: Record<string, number>;
}

export interface ApiError {
  error: { type: string; message: string; job_id?: string | null };
}
