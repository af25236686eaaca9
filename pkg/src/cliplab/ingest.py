"""Feature file ingestion.

Features arrive precomputed by an external extractor as a JSON manifest
plus a raw binary blob (little-endian float32, row-major, no header). The
manifest's clip list order defines the blob's row order. A later round's
manifest can replace the features of an existing dataset in place while
labels (keyed by clip id) survive untouched.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ClipRecord, Dataset, VideoMeta, clip_id_for
from .errors import FormatError, IoError, RefreshError, ValidationError

log = logging.getLogger(__name__)

BLOB_DTYPE = np.dtype("<f4")

#: Assumed when a manifest carries no per-video metadata.
DEFAULT_FPS = 30.0


@dataclass
class ManifestClip:
    video_id: str
    clip_index: int
    start_frame: int
    end_frame: int


@dataclass
class FeatureManifest:
    version: int
    dim: int
    dtype: str
    clips: list[ManifestClip]
    blob_path: str
    round: int = 0
    normalize: bool = False
    videos: dict[str, VideoMeta] = field(default_factory=dict)
    thumbnails: dict[str, str] = field(default_factory=dict)
    base_dir: Path = Path(".")


def load_manifest(manifest_path: str | Path) -> FeatureManifest:
    path = Path(manifest_path)
    if not path.is_file():
        raise IoError(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest {path} is not valid JSON: {exc}") from exc

    for key in ("version", "dim", "dtype", "clips", "blob_path"):
        if key not in raw:
            raise FormatError(f"manifest {path} missing required key {key!r}")
    if raw["dtype"] != "f32le":
        raise FormatError(f"unsupported dtype {raw['dtype']!r}, expected 'f32le'")
    if int(raw["dim"]) <= 0:
        raise FormatError(f"dim must be positive, got {raw['dim']}")

    clips = [
        ManifestClip(
            video_id=str(c["video_id"]),
            clip_index=int(c["clip_index"]),
            start_frame=int(c["start_frame"]),
            end_frame=int(c["end_frame"]),
        )
        for c in raw["clips"]
    ]
    videos = {
        vid: VideoMeta(
            video_id=vid,
            fps=float(meta.get("fps", DEFAULT_FPS)),
            frame_count=int(meta.get("frame_count", 0)),
            source_path=str(meta.get("source_path", "")),
        )
        for vid, meta in raw.get("videos", {}).items()
    }
    return FeatureManifest(
        version=int(raw["version"]),
        dim=int(raw["dim"]),
        dtype=raw["dtype"],
        clips=clips,
        blob_path=str(raw["blob_path"]),
        round=int(raw.get("round", 0)),
        normalize=bool(raw.get("normalize", False)),
        videos=videos,
        thumbnails={str(k): str(v) for k, v in raw.get("thumbnails", {}).items()},
        base_dir=path.parent,
    )


def _read_blob(manifest: FeatureManifest) -> np.ndarray:
    blob = manifest.base_dir / manifest.blob_path
    if not blob.is_file():
        raise IoError(f"feature blob not found: {blob}")
    k, dim = len(manifest.clips), manifest.dim
    expected = k * dim * BLOB_DTYPE.itemsize
    actual = blob.stat().st_size
    if actual != expected:
        raise FormatError(
            f"blob {blob} holds {actual} bytes, expected {expected} ({k} clips x {dim} x 4)"
        )
    data = np.fromfile(blob, dtype=BLOB_DTYPE).reshape(k, dim)
    bad_rows = np.nonzero(~np.isfinite(data).all(axis=1))[0]
    if bad_rows.size:
        row = int(bad_rows[0])
        clip = manifest.clips[row]
        raise ValidationError(
            f"non-finite feature value at row {row} "
            f"(video {clip.video_id!r}, clip_index {clip.clip_index})"
        )
    return data


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Read a manifest and its blob into a validated Dataset."""
    manifest = load_manifest(manifest_path)
    features = _read_blob(manifest)
    if manifest.normalize:
        norms = np.linalg.norm(features, axis=1, keepdims=True)
        np.divide(features, norms, out=features, where=norms > 0)

    videos = dict(manifest.videos)
    clips: list[ClipRecord] = []
    for mc in manifest.clips:
        cid = clip_id_for(mc.video_id, mc.clip_index)
        clips.append(
            ClipRecord(
                clip_id=cid,
                video_id=mc.video_id,
                clip_index=mc.clip_index,
                start_frame=mc.start_frame,
                end_frame=mc.end_frame,
                time_steps=mc.end_frame - mc.start_frame,
                thumbnail_ref=manifest.thumbnails.get(cid, ""),
            )
        )
        if mc.video_id not in videos:
            videos[mc.video_id] = VideoMeta(
                video_id=mc.video_id, fps=DEFAULT_FPS, frame_count=0, source_path=""
            )
    # videos with only derived metadata: frame_count from last clip
    for vid in videos:
        if videos[vid].frame_count == 0:
            last = max((c.end_frame for c in clips if c.video_id == vid), default=0)
            videos[vid] = VideoMeta(
                video_id=vid, fps=videos[vid].fps, frame_count=last,
                source_path=videos[vid].source_path,
            )

    _validate_contiguity(clips)
    for cid, ref in manifest.thumbnails.items():
        if not (manifest.base_dir / ref).is_file():
            raise ValidationError(f"thumbnail for clip {cid!r} not found: {ref}")

    return Dataset(videos=videos, clips=clips, features=features, dim=manifest.dim)


def _validate_contiguity(clips: list[ClipRecord]) -> None:
    by_video: dict[str, list[ClipRecord]] = {}
    for c in clips:
        by_video.setdefault(c.video_id, []).append(c)
    for vid, group in by_video.items():
        group = sorted(group, key=lambda c: c.clip_index)
        for i, c in enumerate(group):
            if c.clip_index != i:
                raise ValidationError(f"video {vid!r}: clip indices not dense at {c.clip_index}")
            if i > 0 and c.start_frame != group[i - 1].end_frame:
                raise ValidationError(
                    f"video {vid!r}: clips {i - 1} and {i} are not contiguous"
                )


def write_features(
    dataset: Dataset,
    manifest_path: str | Path,
    blob_name: str | None = None,
    round: int = 0,
    normalize: bool = False,
    thumbnails: dict[str, str] | None = None,
) -> Path:
    """Write a dataset back out as manifest + blob (the load_dataset inverse)."""
    path = Path(manifest_path)
    blob_name = blob_name or path.stem + ".bin"
    features = np.ascontiguousarray(dataset.features, dtype=BLOB_DTYPE)
    (path.parent / blob_name).write_bytes(features.tobytes())
    doc = {
        "version": 1,
        "dim": dataset.dim,
        "dtype": "f32le",
        "round": round,
        "normalize": normalize,
        "blob_path": blob_name,
        "clips": [
            {
                "video_id": c.video_id,
                "clip_index": c.clip_index,
                "start_frame": c.start_frame,
                "end_frame": c.end_frame,
            }
            for c in dataset.clips
        ],
        "videos": {
            vid: {"fps": v.fps, "frame_count": v.frame_count, "source_path": v.source_path}
            for vid, v in dataset.videos.items()
        },
    }
    if thumbnails:
        doc["thumbnails"] = thumbnails
    path.write_text(json.dumps(doc, indent=1))
    return path


def refresh_features(dataset: Dataset, new_manifest_path: str | Path) -> Dataset:
    """Swap in a later round's features.

    The new manifest must cover at least the current clip set at the same
    feature dimension; labels held elsewhere stay valid because clip ids
    are stable.
    """
    new = load_dataset(new_manifest_path)
    if new.dim != dataset.dim:
        raise RefreshError(f"feature dim changed {dataset.dim} -> {new.dim}")
    missing = sorted(set(dataset.clip_ids) - set(new.clip_ids))
    if missing:
        shown = ", ".join(missing[:5]) + ("..." if len(missing) > 5 else "")
        raise RefreshError(f"new manifest drops {len(missing)} clips: {shown}")
    log.info("features refreshed: %d -> %d clips", len(dataset.clips), len(new.clips))
    return new
