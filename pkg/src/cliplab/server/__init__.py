"""HTTP service exposing a session to the browser UI."""

from .app import SessionRuntime, create_app
from .jobs import JobManager, JobStatus

__all__ = ["JobManager", "JobStatus", "SessionRuntime", "create_app"]
