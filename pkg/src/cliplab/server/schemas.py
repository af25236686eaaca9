"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SessionOut(BaseModel):
    round: int
    clip_count: int
    video_count: int
    labeled_count: int
    unlabeled_count: int
    budget_seconds: float | None
    toa_cumulative_seconds: float
    toa_log: list[tuple[int, float]]
    class_palette: list[tuple[str, str]]
    state_hash: str
    active_job: "JobOut | None" = None


class EmbeddingPointOut(BaseModel):
    clip_id: str
    x: float
    y: float
    current_label: str
    thumbnail_url: str | None = None


class EmbeddingOut(BaseModel):
    round: int
    points: list[EmbeddingPointOut]


class LabelRequest(BaseModel):
    class_name: str = Field(min_length=1)
    clip_ids: list[str] | None = None
    polygon: list[tuple[float, float]] | None = None
    only_unlabeled: bool = False


class LabelResponse(BaseModel):
    affected_clip_ids: list[str]
    labeled_count: int
    unlabeled_count: int
    class_color: str | None = None


class RoundRequest(BaseModel):
    manifest_path: str | None = None
    toa_seconds: float | None = Field(default=None, ge=0)


class JobOut(BaseModel):
    job_id: str
    kind: str
    state: str
    progress: float
    message: str


class MetricsOut(BaseModel):
    knn_k: int | None
    knn_accuracy: float | None
    kmeans_k: int | None
    homogeneity: float | None
    completeness: float | None
    time_gain: int | None
    per_class_counts: dict[str, int]


class ErrorBody(BaseModel):
    type: str
    message: str
    job_id: str | None = None


class ErrorOut(BaseModel):
    error: ErrorBody
