"""Single-slot background job runner for embedding recomputes."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, replace
from typing import Callable

from ..errors import JobConflictError

_STATE_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}


@dataclass(frozen=True)
class JobStatus:
    job_id: str
    kind: str  # "embed" | "refresh"
    state: str  # queued | running | done | failed
    progress: float = 0.0
    message: str = ""


class JobManager:
    """Runs at most one job at a time; states only move forward."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, JobStatus] = {}
        self._active_id: str | None = None

    def submit(self, kind: str, work: Callable[[Callable[[float], None]], None]) -> JobStatus:
        with self._lock:
            if self._active_id is not None:
                active = self._jobs[self._active_id]
                if active.state in ("queued", "running"):
                    raise JobConflictError(f"job {active.job_id} is already {active.state}")
            job = JobStatus(job_id=uuid.uuid4().hex[:12], kind=kind, state="queued")
            self._jobs[job.job_id] = job
            self._active_id = job.job_id
        thread = threading.Thread(target=self._run, args=(job.job_id, work), daemon=True)
        thread.start()
        return job

    def get(self, job_id: str) -> JobStatus | None:
        with self._lock:
            return self._jobs.get(job_id)

    def active(self) -> JobStatus | None:
        with self._lock:
            if self._active_id is None:
                return None
            job = self._jobs[self._active_id]
            return job if job.state in ("queued", "running") else None

    def _update(self, job_id: str, **changes) -> None:
        with self._lock:
            job = self._jobs[job_id]
            new_state = changes.get("state", job.state)
            if _STATE_ORDER[new_state] < _STATE_ORDER[job.state]:
                return  # never move backwards
            self._jobs[job_id] = replace(job, **changes)

    def _run(self, job_id: str, work) -> None:
        self._update(job_id, state="running")
        try:
            work(lambda frac: self._update(job_id, progress=min(max(frac, 0.0), 1.0)))
        except Exception as exc:  # job boundary: report, don't crash the server
            self._update(job_id, state="failed", message=str(exc))
        else:
            self._update(job_id, state="done", progress=1.0)
