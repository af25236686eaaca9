"""HTTP API over one annotation session.

Reads are served from immutable snapshots and never wait on a running
job; mutations are serialized through the runtime lock; the embedding
recompute runs as the single background job and swaps in atomically, so
the previous map keeps being served while a new one is optimizing.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..core import ClipRecord, UNLABELED, export_document
from ..embedding import Embedding, TsneConfig, run_tsne
from ..errors import (
    BudgetExhaustedError,
    CliplabError,
    JobConflictError,
    NotFoundError,
    ValidationError,
)
from ..geometry import LassoPolygon
from ..ingest import refresh_features
from ..metrics import MetricsReport, compute_report, time_gain
from ..session import SessionState, clips_in_polygon, assign_label, state_hash
from .jobs import JobManager, JobStatus
from . import schemas

log = logging.getLogger(__name__)


class SessionRuntime:
    """Owns the live session: serialized mutations, snapshot reads, one job."""

    def __init__(self, session: SessionState, tsne_config: TsneConfig | None = None):
        self._lock = threading.RLock()
        self.session = session
        self.tsne_config = tsne_config or TsneConfig()
        self.jobs = JobManager()
        # embedding snapshot paired with the clip list it was computed over
        self._published: tuple[Embedding, list[ClipRecord]] | None = None
        if session.embedding is not None:
            self._published = (session.embedding, list(session.dataset.clips))

    # -- reads ---------------------------------------------------------------
    def summary(self) -> schemas.SessionOut:
        with self._lock:
            s = self.session
            labeled, unlabeled = s.pool_counts()
            active = self.jobs.active()
            return schemas.SessionOut(
                round=s.current_round,
                clip_count=len(s.dataset.clips),
                video_count=len(s.dataset.videos),
                labeled_count=labeled,
                unlabeled_count=unlabeled,
                budget_seconds=s.budget_seconds,
                toa_cumulative_seconds=s.cumulative_toa(),
                toa_log=[(r, sec) for r, sec in s.toa_log],
                class_palette=list(s.class_palette),
                state_hash=state_hash(s),
                active_job=_job_out(active) if active else None,
            )

    def published(self) -> tuple[Embedding, list[ClipRecord]] | None:
        with self._lock:
            return self._published

    def embedding_payload(self) -> schemas.EmbeddingOut:
        snapshot = self.published()
        if snapshot is None:
            active = self.jobs.active()
            raise _NotReady(active.job_id if active else None)
        embedding, clips = snapshot
        with self._lock:
            labels = self.session.store.current_labels()
            rnd = self.session.current_round
        points = [
            schemas.EmbeddingPointOut(
                clip_id=clip.clip_id,
                x=float(x),
                y=float(y),
                current_label=labels.get(clip.clip_id, UNLABELED),
                thumbnail_url=f"/thumbs/{clip.clip_id}" if clip.thumbnail_ref else None,
            )
            for clip, (x, y) in zip(clips, embedding.points)
        ]
        return schemas.EmbeddingOut(round=rnd, points=points)

    def metrics(self) -> schemas.MetricsOut:
        snapshot = self.published()
        with self._lock:
            s = self.session
            labels = s.store.current_labels()
            toa_minutes = s.cumulative_toa() / 60.0
            video_minutes = s.dataset.total_video_minutes()
        if snapshot is None:
            labeled_points, labeled_labels = [], []
        else:
            embedding, clips = snapshot
            pairs = [
                (pt, labels[c.clip_id])
                for c, pt in zip(clips, embedding.points)
                if c.clip_id in labels
            ]
            labeled_points = [p for p, _ in pairs]
            labeled_labels = [l for _, l in pairs]
        if len(labeled_labels) >= 2:
            report = compute_report(
                labeled_points, labeled_labels,
                video_minutes=video_minutes,
                annotation_minutes=toa_minutes if toa_minutes > 0 else None,
            )
        else:
            report = MetricsReport(
                per_class_counts={l: labeled_labels.count(l) for l in set(labeled_labels)}
            )
            if toa_minutes > 0:
                report.time_gain = time_gain(video_minutes, toa_minutes)
        return schemas.MetricsOut(**report.to_dict())

    def export(self) -> dict:
        with self._lock:
            return export_document(self.session.dataset, self.session.store)

    def thumbnail_path(self, clip_id: str) -> Path:
        with self._lock:
            for clip in self.session.dataset.clips:
                if clip.clip_id == clip_id:
                    if not clip.thumbnail_ref:
                        raise NotFoundError(f"clip {clip_id!r} has no thumbnail")
                    base = Path(self.session.manifest_path).parent
                    return base / clip.thumbnail_ref
        raise NotFoundError(f"unknown clip {clip_id!r}")

    # -- mutations -------------------------------------------------------------
    def apply_labels(self, req: schemas.LabelRequest) -> schemas.LabelResponse:
        with self._lock:
            s = self.session
            if req.polygon is not None:
                snapshot = self._published
                if snapshot is None:
                    active = self.jobs.active()
                    raise _NotReady(active.job_id if active else None)
                polygon = LassoPolygon.from_list(req.polygon)
                embedding, clips = snapshot
                affected = clips_in_polygon(
                    embedding.points, clips, polygon,
                    store=s.store, only_unlabeled=req.only_unlabeled,
                )
            elif req.clip_ids is not None:
                affected = list(req.clip_ids)
            else:
                raise ValidationError("request needs either clip_ids or polygon")
            if affected:
                assign_label(s, affected, req.class_name)
            labeled, unlabeled = s.pool_counts()
            return schemas.LabelResponse(
                affected_clip_ids=sorted(affected),
                labeled_count=labeled,
                unlabeled_count=unlabeled,
                class_color=s.color_of(req.class_name),
            )

    def start_round(self, req: schemas.RoundRequest) -> JobStatus:
        """Advance the round and schedule the embedding recompute.

        Validation happens before any state change so a refused advance
        leaves the session byte-identical.
        """
        with self._lock:
            if self.jobs.active() is not None:
                raise JobConflictError("a background job is already running")
            s = self.session
            if s.budget_seconds is not None and s.cumulative_toa() >= s.budget_seconds:
                raise BudgetExhaustedError(
                    f"annotation budget exhausted ({s.cumulative_toa():.0f}s "
                    f">= {s.budget_seconds:.0f}s)"
                )
            new_dataset = None
            if req.manifest_path:
                new_dataset = refresh_features(s.dataset, req.manifest_path)
            closed_round = s.current_round
            if req.toa_seconds:
                s.toa_log.append((closed_round, float(req.toa_seconds)))
            if new_dataset is not None:
                s.dataset = new_dataset
                s.manifest_path = str(req.manifest_path)
            s.current_round += 1
            kind = "refresh" if new_dataset is not None else "embed"
        return self.jobs.submit(kind, self._embed_work)

    def schedule_embed(self) -> JobStatus:
        """Queue an embedding compute without advancing the round."""
        return self.jobs.submit("embed", self._embed_work)

    def _embed_work(self, set_progress) -> None:
        with self._lock:
            features = self.session.dataset.features
            clips = list(self.session.dataset.clips)
            config = self.tsne_config
        embedding = run_tsne(
            features, config,
            progress=lambda i, total: set_progress(i / total),
        )
        with self._lock:
            self.session.embedding = embedding
            self._published = (embedding, clips)
        log.info("embedding recomputed over %d clips", len(clips))


class _NotReady(CliplabError):
    def __init__(self, job_id: str | None):
        super().__init__("no embedding computed yet")
        self.job_id = job_id


def _job_out(job: JobStatus) -> schemas.JobOut:
    return schemas.JobOut(
        job_id=job.job_id, kind=job.kind, state=job.state,
        progress=job.progress, message=job.message,
    )


def _error_response(status: int, err_type: str, message: str, job_id: str | None = None):
    body = schemas.ErrorOut(
        error=schemas.ErrorBody(type=err_type, message=message, job_id=job_id)
    )
    return JSONResponse(status_code=status, content=body.model_dump())


def create_app(runtime: SessionRuntime, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cliplab", version="0.1.0")

    @app.exception_handler(CliplabError)
    async def _handle(request, exc: CliplabError):
        if isinstance(exc, _NotReady):
            return _error_response(409, "not_ready", str(exc), job_id=exc.job_id)
        if isinstance(exc, JobConflictError):
            return _error_response(409, "job_conflict", str(exc))
        if isinstance(exc, BudgetExhaustedError):
            return _error_response(409, "budget_exhausted", str(exc))
        if isinstance(exc, NotFoundError):
            return _error_response(404, "not_found", str(exc))
        return _error_response(400, type(exc).__name__, str(exc))

    @app.get("/api/session", response_model=schemas.SessionOut)
    def get_session():
        return runtime.summary()

    @app.get("/api/embedding", response_model=schemas.EmbeddingOut)
    def get_embedding():
        return runtime.embedding_payload()

    @app.post("/api/labels", response_model=schemas.LabelResponse)
    def post_labels(req: schemas.LabelRequest):
        return runtime.apply_labels(req)

    @app.post("/api/round", response_model=schemas.JobOut)
    def post_round(req: schemas.RoundRequest):
        return _job_out(runtime.start_round(req))

    @app.get("/api/metrics", response_model=schemas.MetricsOut)
    def get_metrics():
        return runtime.metrics()

    @app.get("/api/export")
    def get_export():
        return runtime.export()

    @app.get("/api/jobs/{job_id}", response_model=schemas.JobOut)
    def get_job(job_id: str):
        job = runtime.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id!r}")
        return _job_out(job)

    @app.get("/thumbs/{clip_id}")
    def get_thumbnail(clip_id: str):
        path = runtime.thumbnail_path(clip_id)
        if not path.is_file():
            raise NotFoundError(f"thumbnail file missing for clip {clip_id!r}")
        return FileResponse(path)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
