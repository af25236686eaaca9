"""Domain model: videos, fixed-length clips, labels and temporal segments.

A video is cut into contiguous non-overlapping windows of ``time_steps``
frames; each window is one annotatable data point. Labels live in an
append-only store keyed by clip id, and runs of equally-labeled clips
merge into temporal segments on export.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from .errors import NotFoundError, ParameterError, ValidationError

#: Reserved class name marking a clip as still belonging to the unlabeled
#: pool. It is never exported.
UNLABELED = "__unlabeled__"


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    fps: float
    frame_count: int
    source_path: str = ""

    def __post_init__(self):
        if self.fps <= 0:
            raise ValidationError(f"video {self.video_id!r}: fps must be positive, got {self.fps}")
        if self.frame_count < 0:
            raise ValidationError(f"video {self.video_id!r}: negative frame_count")

    @property
    def duration_minutes(self) -> float:
        return self.frame_count / self.fps / 60.0


@dataclass(frozen=True)
class ClipRecord:
    """One fixed-length window of a video, half-open frame range [start, end)."""

    clip_id: str
    video_id: str
    clip_index: int
    start_frame: int
    end_frame: int
    time_steps: int
    thumbnail_ref: str = ""

    def __post_init__(self):
        if self.end_frame - self.start_frame != self.time_steps:
            raise ValidationError(
                f"clip {self.clip_id!r}: frame range [{self.start_frame},{self.end_frame}) "
                f"does not span time_steps={self.time_steps}"
            )


@dataclass(frozen=True)
class TemporalSegment:
    """A labeled time interval of one video, in seconds, half-open."""

    video_id: str
    class_name: str
    start_s: float
    end_s: float

    def __post_init__(self):
        if not (0 <= self.start_s < self.end_s):
            raise ValidationError(
                f"segment of {self.video_id!r}: invalid interval [{self.start_s}, {self.end_s})"
            )


@dataclass(frozen=True)
class LabelAssignment:
    clip_id: str
    class_name: str
    round: int
    assigned_at: float


@dataclass
class Dataset:
    """Clips of many videos plus their feature matrix, row-aligned with clips."""

    videos: dict[str, VideoMeta]
    clips: list[ClipRecord]
    features: np.ndarray  # k x dim, float32
    dim: int

    def __post_init__(self):
        if len(self.clips) != len(self.features):
            raise ValidationError(
                f"feature rows ({len(self.features)}) != clip count ({len(self.clips)})"
            )
        for clip in self.clips:
            if clip.video_id not in self.videos:
                raise ValidationError(f"clip {clip.clip_id!r} references unknown video {clip.video_id!r}")
        seen = set()
        for clip in self.clips:
            if clip.clip_id in seen:
                raise ValidationError(f"duplicate clip id {clip.clip_id!r}")
            seen.add(clip.clip_id)

    @property
    def clip_ids(self) -> list[str]:
        return [c.clip_id for c in self.clips]

    def clips_of(self, video_id: str) -> list[ClipRecord]:
        if video_id not in self.videos:
            raise NotFoundError(f"unknown video {video_id!r}")
        return [c for c in self.clips if c.video_id == video_id]

    def total_video_minutes(self) -> float:
        return sum(v.duration_minutes for v in self.videos.values())


def clip_id_for(video_id: str, clip_index: int) -> str:
    return f"{video_id}:{clip_index:05d}"


def make_clips(video: VideoMeta, time_steps: int) -> list[ClipRecord]:
    """Split a video into floor(frame_count / time_steps) contiguous windows.

    A trailing remainder shorter than one window is dropped so every clip
    holds exactly ``time_steps`` frames.
    """
    if time_steps < 1:
        raise ParameterError(f"time_steps must be >= 1, got {time_steps}")
    count = video.frame_count // time_steps
    return [
        ClipRecord(
            clip_id=clip_id_for(video.video_id, i),
            video_id=video.video_id,
            clip_index=i,
            start_frame=i * time_steps,
            end_frame=(i + 1) * time_steps,
            time_steps=time_steps,
        )
        for i in range(count)
    ]


def middle_frame(clip: ClipRecord) -> int:
    """Frame index of the clip's representative (middle) frame."""
    return clip.start_frame + clip.time_steps // 2


class LabelStore:
    """Append-only label history with a current pointer per clip.

    Reassigning a clip supersedes its current label but keeps the full
    history. Single writer, many readers; reads work on snapshots.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._history: list[LabelAssignment] = []
        self._current: dict[str, LabelAssignment] = {}

    def assign(self, clip_id: str, class_name: str, round: int, assigned_at: float | None = None) -> LabelAssignment:
        if not class_name:
            raise ParameterError("class_name must be nonempty")
        entry = LabelAssignment(
            clip_id=clip_id,
            class_name=class_name,
            round=round,
            assigned_at=time.time() if assigned_at is None else assigned_at,
        )
        with self._lock:
            self._history.append(entry)
            self._current[clip_id] = entry
        return entry

    def current(self, clip_id: str) -> str | None:
        """Current class of a clip, or None while it sits in the unlabeled pool."""
        with self._lock:
            entry = self._current.get(clip_id)
        if entry is None or entry.class_name == UNLABELED:
            return None
        return entry.class_name

    def current_labels(self) -> dict[str, str]:
        """Snapshot of clip id -> current class, unlabeled clips omitted."""
        with self._lock:
            items = list(self._current.items())
        return {cid: e.class_name for cid, e in items if e.class_name != UNLABELED}

    def history(self, clip_id: str | None = None) -> list[LabelAssignment]:
        with self._lock:
            entries = list(self._history)
        if clip_id is None:
            return entries
        return [e for e in entries if e.clip_id == clip_id]

    def replay(self, entries: list[LabelAssignment]) -> None:
        """Rebuild the store from a persisted history, in order."""
        with self._lock:
            self._history = list(entries)
            self._current = {}
            for e in entries:
                self._current[e.clip_id] = e

    def __len__(self) -> int:
        with self._lock:
            return len(self._history)


def export_segments(dataset: Dataset, store: LabelStore, video_id: str) -> list[TemporalSegment]:
    """Merge maximal runs of consecutive equally-labeled clips into segments.

    Clip ``i`` covers seconds [i*ts/fps, (i+1)*ts/fps). Unlabeled clips
    break runs and produce no segment.
    """
    if video_id not in dataset.videos:
        raise NotFoundError(f"unknown video {video_id!r}")
    fps = dataset.videos[video_id].fps
    clips = sorted(dataset.clips_of(video_id), key=lambda c: c.clip_index)

    segments: list[TemporalSegment] = []
    run_class: str | None = None
    run_start: int = 0
    prev_index: int = -1

    def flush(end_index: int):
        nonlocal run_class
        if run_class is not None:
            segments.append(
                TemporalSegment(
                    video_id=video_id,
                    class_name=run_class,
                    start_s=run_start * clips[0].time_steps / fps,
                    end_s=end_index * clips[0].time_steps / fps,
                )
            )
        run_class = None

    for clip in clips:
        label = store.current(clip.clip_id)
        contiguous = clip.clip_index == prev_index + 1
        if label != run_class or not contiguous:
            flush(prev_index + 1)
            if label is not None:
                run_class = label
                run_start = clip.clip_index
        prev_index = clip.clip_index
    flush(prev_index + 1)
    return segments


def export_document(dataset: Dataset, store: LabelStore) -> dict:
    """Label export JSON document covering every video of the dataset.

    Segment times are rounded to 4 fractional digits.
    """
    videos: dict[str, list[dict]] = {}
    for video_id in sorted(dataset.videos):
        segs = export_segments(dataset, store, video_id)
        videos[video_id] = [
            {"label": s.class_name, "segment": [round(s.start_s, 4), round(s.end_s, 4)]}
            for s in segs
        ]
    return {"version": 1, "videos": videos}


def labels_from_segments(dataset: Dataset, video_id: str, segments: list[TemporalSegment]) -> dict[str, str]:
    """Reconstruct per-clip labels: each clip takes the segment class covering
    its midpoint second. Clips covered by no segment are omitted."""
    fps = dataset.videos[video_id].fps
    out: dict[str, str] = {}
    for clip in dataset.clips_of(video_id):
        mid_s = (clip.clip_index + 0.5) * clip.time_steps / fps
        for seg in segments:
            if seg.start_s <= mid_s < seg.end_s:
                out[clip.clip_id] = seg.class_name
                break
    return out
