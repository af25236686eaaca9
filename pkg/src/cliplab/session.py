"""Incremental annotation loop: pools, rounds, lasso selection, ToA log.

Clips start in the unlabeled pool; the oracle lassos points of the 2D
map and assigns classes, moving clips to the labeled pool. Advancing a
round optionally swaps in refreshed features (labels survive by clip
id) and repeats until the pool is empty or the budget runs out.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset, LabelAssignment, LabelStore
from .errors import (
    BudgetExhaustedError,
    NotFoundError,
    ParameterError,
    ValidationError,
)
from .geometry import LassoPolygon, points_in_polygon
from .ingest import load_dataset, refresh_features
from .embedding import Embedding

#: Default display colors cycled over classes in palette order.
PALETTE_COLORS = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

SESSION_VERSION = 1


@dataclass
class SessionState:
    dataset: Dataset
    store: LabelStore
    manifest_path: str
    embedding: Embedding | None = None
    embedding_path: str | None = None
    current_round: int = 0
    toa_log: list[tuple[int, float]] = field(default_factory=list)
    budget_seconds: float | None = None
    class_palette: list[tuple[str, str]] = field(default_factory=list)

    def labeled_clip_ids(self) -> list[str]:
        return [c.clip_id for c in self.dataset.clips if self.store.current(c.clip_id)]

    def unlabeled_clip_ids(self) -> list[str]:
        return [c.clip_id for c in self.dataset.clips if not self.store.current(c.clip_id)]

    def pool_counts(self) -> tuple[int, int]:
        labeled = len(self.labeled_clip_ids())
        return labeled, len(self.dataset.clips) - labeled

    def cumulative_toa(self) -> float:
        return sum(seconds for _, seconds in self.toa_log)

    def color_of(self, class_name: str) -> str | None:
        for name, color in self.class_palette:
            if name == class_name:
                return color
        return None


@dataclass(frozen=True)
class BatchSelection:
    video_ids: tuple[str, ...]
    pool_exhausted: bool


def new_session(manifest_path: str | Path, budget_seconds: float | None = None) -> SessionState:
    dataset = load_dataset(manifest_path)
    return SessionState(
        dataset=dataset,
        store=LabelStore(),
        manifest_path=str(manifest_path),
        budget_seconds=budget_seconds,
    )


def select_unlabeled_batch(session: SessionState, n_videos: int, seed: int) -> BatchSelection:
    """Uniform seeded draw of whole videos that still hold unlabeled clips."""
    if n_videos < 0:
        raise ParameterError(f"n_videos must be nonnegative, got {n_videos}")
    unlabeled_videos = sorted(
        {c.video_id for c in session.dataset.clips if not session.store.current(c.clip_id)}
    )
    if not unlabeled_videos:
        return BatchSelection(video_ids=(), pool_exhausted=True)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(unlabeled_videos))
    take = min(n_videos, len(unlabeled_videos))
    chosen = tuple(unlabeled_videos[i] for i in order[:take])
    return BatchSelection(video_ids=chosen, pool_exhausted=False)


def clips_in_polygon(
    points: np.ndarray,
    clips,
    polygon: LassoPolygon,
    store: LabelStore | None = None,
    only_unlabeled: bool = False,
) -> list[str]:
    """Clip ids whose 2D point falls inside the polygon, sorted by clip id."""
    mask = points_in_polygon(points, polygon)
    selected = [c.clip_id for c, hit in zip(clips, mask) if hit]
    if only_unlabeled and store is not None:
        selected = [cid for cid in selected if not store.current(cid)]
    return sorted(selected)


def lasso_select(
    session: SessionState,
    polygon: LassoPolygon,
    only_unlabeled: bool = False,
) -> list[str]:
    """Lasso selection against the session's current embedding."""
    if session.embedding is None:
        raise ValidationError("no embedding computed for the current round")
    return clips_in_polygon(
        session.embedding.points, session.dataset.clips, polygon,
        store=session.store, only_unlabeled=only_unlabeled,
    )


def assign_label(session: SessionState, clip_ids, class_name: str) -> SessionState:
    """Label a batch of clips at the current round; all-or-nothing."""
    if not class_name:
        raise ParameterError("class_name must be nonempty")
    clip_ids = list(clip_ids)
    known = set(session.dataset.clip_ids)
    unknown = [cid for cid in clip_ids if cid not in known]
    if unknown:
        raise NotFoundError(f"unknown clip ids: {unknown[:10]}")
    for cid in clip_ids:
        session.store.assign(cid, class_name, round=session.current_round)
    if clip_ids and session.color_of(class_name) is None:
        color = PALETTE_COLORS[len(session.class_palette) % len(PALETTE_COLORS)]
        session.class_palette.append((class_name, color))
    return session


def record_toa(session: SessionState, seconds: float) -> SessionState:
    if seconds < 0:
        raise ParameterError(f"ToA seconds must be nonnegative, got {seconds}")
    session.toa_log.append((session.current_round, float(seconds)))
    return session


def advance_round(session: SessionState, new_manifest_path: str | Path | None = None) -> SessionState:
    """Move to the next round, optionally swapping in refreshed features.

    Refusal and refresh failures leave the session untouched.
    """
    if session.budget_seconds is not None and session.cumulative_toa() >= session.budget_seconds:
        raise BudgetExhaustedError(
            f"annotation budget exhausted ({session.cumulative_toa():.0f}s "
            f">= {session.budget_seconds:.0f}s)"
        )
    if new_manifest_path is not None:
        session.dataset = refresh_features(session.dataset, new_manifest_path)
        session.manifest_path = str(new_manifest_path)
        session.embedding = None  # stale: features changed
        session.embedding_path = None
    session.current_round += 1
    return session


# -- persistence -------------------------------------------------------------

def _snapshot_dict(session: SessionState) -> dict:
    return {
        "version": SESSION_VERSION,
        "manifest_path": session.manifest_path,
        "round": session.current_round,
        "budget_seconds": session.budget_seconds,
        "toa_log": [[r, s] for r, s in session.toa_log],
        "class_palette": [[n, c] for n, c in session.class_palette],
        "label_history": [
            {
                "clip_id": e.clip_id,
                "class_name": e.class_name,
                "round": e.round,
                "assigned_at": e.assigned_at,
            }
            for e in session.store.history()
        ],
        "embedding_path": session.embedding_path,
        "config_hashes": {
            "manifest_sha256": _file_sha256(session.manifest_path),
            "embedding_config_sha256": (
                _json_sha256(session.embedding.config.to_dict())
                if session.embedding and session.embedding.config
                else None
            ),
        },
    }


def _file_sha256(path: str) -> str | None:
    p = Path(path)
    if not p.is_file():
        return None
    return hashlib.sha256(p.read_bytes()).hexdigest()


def _json_sha256(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def state_hash(session: SessionState) -> str:
    """Hash of the mutable session state (used to verify mutation atomicity)."""
    snap = _snapshot_dict(session)
    snap.pop("config_hashes")
    return _json_sha256(snap)


def save_session(session: SessionState, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_snapshot_dict(session), indent=1))
    return path


def load_session(path: str | Path) -> SessionState:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"session file not found: {path}")
    raw = json.loads(path.read_text())
    if raw.get("version") != SESSION_VERSION:
        raise ValidationError(f"unsupported session version {raw.get('version')!r}")

    manifest_path = raw["manifest_path"]
    if not Path(manifest_path).is_absolute():
        candidate = path.parent / manifest_path
        if candidate.is_file():
            manifest_path = str(candidate)
    dataset = load_dataset(manifest_path)

    store = LabelStore()
    store.replay(
        [
            LabelAssignment(
                clip_id=e["clip_id"],
                class_name=e["class_name"],
                round=int(e["round"]),
                assigned_at=float(e["assigned_at"]),
            )
            for e in raw.get("label_history", [])
        ]
    )

    embedding = None
    embedding_path = raw.get("embedding_path")
    if embedding_path:
        emb_file = Path(embedding_path)
        if not emb_file.is_absolute():
            emb_file = path.parent / emb_file
        if emb_file.is_file():
            embedding = Embedding.from_dict(json.loads(emb_file.read_text()))

    return SessionState(
        dataset=dataset,
        store=store,
        manifest_path=raw["manifest_path"],
        embedding=embedding,
        embedding_path=embedding_path,
        current_round=int(raw["round"]),
        toa_log=[(int(r), float(s)) for r, s in raw.get("toa_log", [])],
        budget_seconds=raw.get("budget_seconds"),
        class_palette=[(n, c) for n, c in raw.get("class_palette", [])],
    )
