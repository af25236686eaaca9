import {
  ApiError,
  EmbeddingPayload,
  JobStatus,
  LabelRequest,
  LabelResponse,
  MetricsReport,
  RoundRequest,
  SessionSummary,
} from "./types";

export class ApiRequestError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly errorType: string,
    readonly jobId: string | null = null,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the server's JSON endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let parsed: ApiError | null = null;
      try {
        parsed = (await response.json()) as ApiError;
      } catch {
        // non-JSON error body: fall through to the generic message
      }
      throw new ApiRequestError(
        parsed?.error.message ?? `request failed: ${response.status}`,
        response.status,
        parsed?.error.type ?? "http_error",
        parsed?.error.job_id ?? null,
      );
    }
    return (await response.json()) as T;
  }

  getSession(): Promise<SessionSummary> {
    return this.request("/api/session");
  }

  getEmbedding(): Promise<EmbeddingPayload> {
    return this.request("/api/embedding");
  }

  postLabels(body: LabelRequest): Promise<LabelResponse> {
    return this.request("/api/labels", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  postRound(body: RoundRequest): Promise<JobStatus> {
    return this.request("/api/round", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request(`/api/jobs/${jobId}`);
  }

  getMetrics(): Promise<MetricsReport> {
    return this.request("/api/metrics");
  }

  /** Poll a job until it reaches a terminal state. */
  async waitForJob(jobId: string, intervalMs = 250, timeoutMs = 300_000): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done" || job.state === "failed") return job;
      if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
