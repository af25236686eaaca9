import json

import numpy as np
import pytest

from cliplab.core import Dataset, LabelStore, VideoMeta, make_clips


def write_manifest(
    directory,
    features,
    videos_spec,
    ts=32,
    fps=30.0,
    name="manifest.json",
    round=0,
    normalize=False,
    thumbnails=None,
):
    """Write a manifest + blob pair; videos_spec is [(video_id, n_clips), ...]."""
    features = np.ascontiguousarray(features, dtype="<f4")
    clips = []
    videos = {}
    for vid, n_clips in videos_spec:
        videos[vid] = {
            "fps": fps,
            "frame_count": n_clips * ts,
            "source_path": f"/videos/{vid}.mp4",
        }
        for i in range(n_clips):
            clips.append(
                {
                    "video_id": vid,
                    "clip_index": i,
                    "start_frame": i * ts,
                    "end_frame": (i + 1) * ts,
                }
            )
    assert len(clips) == len(features), "videos_spec clip total must match feature rows"
    blob_name = name.rsplit(".", 1)[0] + ".bin"
    (directory / blob_name).write_bytes(features.tobytes())
    doc = {
        "version": 1,
        "dim": int(features.shape[1]),
        "dtype": "f32le",
        "round": round,
        "normalize": normalize,
        "blob_path": blob_name,
        "clips": clips,
        "videos": videos,
    }
    if thumbnails:
        doc["thumbnails"] = thumbnails
    path = directory / name
    path.write_text(json.dumps(doc))
    return path


def make_dataset(features, videos_spec, ts=32, fps=30.0):
    """In-memory dataset without touching disk."""
    features = np.asarray(features, dtype=np.float32)
    videos = {}
    clips = []
    for vid, n_clips in videos_spec:
        meta = VideoMeta(video_id=vid, fps=fps, frame_count=n_clips * ts)
        videos[vid] = meta
        clips.extend(make_clips(meta, ts))
    return Dataset(videos=videos, clips=clips, features=features, dim=features.shape[1])


def gaussian_clusters(n, k, dim, seed, separation=10.0, intra_std=0.05):
    """k well-separated Gaussian blobs; returns (features, labels)."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(k, dim))
    centers = separation * centers / np.linalg.norm(centers, axis=1, keepdims=True)
    per = n // k
    sizes = [per + (1 if i < n - per * k else 0) for i in range(k)]
    feats = np.vstack(
        [centers[i] + rng.normal(scale=intra_std, size=(sizes[i], dim)) for i in range(k)]
    )
    labels = np.repeat(np.arange(k), sizes)
    return feats, labels


@pytest.fixture
def tiny_session(tmp_path):
    """Small labeled-ready session over 3 videos / 12 clips of 8-d features."""
    from cliplab.session import new_session

    rng = np.random.default_rng(5)
    feats = rng.normal(size=(12, 8))
    manifest = write_manifest(tmp_path, feats, [("va", 4), ("vb", 4), ("vc", 4)])
    return new_session(manifest)
