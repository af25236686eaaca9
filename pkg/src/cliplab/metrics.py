"""Annotation-quality emulation metrics.

Leave-one-out KNN accuracy proxies how locally homogeneous the 2D map is
(how safely a human can group-label neighborhoods); K-means plus
entropy-based homogeneity/completeness score the global class
separation; time gain is the ratio of video duration to annotation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ValidationError


@dataclass
class MetricsReport:
    knn_k: int | None = None
    knn_accuracy: float | None = None
    kmeans_k: int | None = None
    homogeneity: float | None = None
    completeness: float | None = None
    time_gain: int | None = None
    per_class_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "knn_k": self.knn_k,
            "knn_accuracy": self.knn_accuracy,
            "kmeans_k": self.kmeans_k,
            "homogeneity": self.homogeneity,
            "completeness": self.completeness,
            "time_gain": self.time_gain,
            "per_class_counts": dict(self.per_class_counts),
        }


def knn_accuracy(points: np.ndarray, labels, k: int = 4) -> float:
    """Leave-one-out KNN label agreement in the 2D map.

    Each point is predicted by majority vote of its k nearest other
    points; vote ties go to the nearest neighbor's label. k is clamped
    to N-1.
    """
    pts = np.asarray(points, dtype=np.float64)
    labels = list(labels)
    n = len(pts)
    if n < 2:
        raise ParameterError(f"need at least 2 points, got {n}")
    if len(labels) != n:
        raise ParameterError(f"{n} points but {len(labels)} labels")
    missing = [i for i, lab in enumerate(labels) if lab is None or lab == ""]
    if missing:
        raise ValidationError(f"unlabeled points at indices {missing[:10]}")
    k = min(k, n - 1)

    d2 = np.square(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]

    correct = 0
    for i in range(n):
        votes: dict[str, int] = {}
        for j in order[i]:
            lab = labels[j]
            votes[lab] = votes.get(lab, 0) + 1
        top = max(votes.values())
        winners = {lab for lab, cnt in votes.items() if cnt == top}
        if len(winners) == 1:
            predicted = next(iter(winners))
        else:
            # tie: the nearest neighbor belonging to a tied class decides
            predicted = next(labels[j] for j in order[i] if labels[j] in winners)
        if predicted == labels[i]:
            correct += 1
    return correct / n


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    first = rng.integers(n)
    centers[0] = points[first]
    d2 = np.square(points - centers[0]).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            choice = rng.choice(n, p=probs)
        else:
            # all remaining mass on existing centers (duplicates): uniform
            choice = rng.integers(n)
        centers[c] = points[choice]
        d2 = np.minimum(d2, np.square(points - centers[c]).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int, tol: float):
    k = len(centers)
    assign = np.zeros(len(points), dtype=np.int64)
    for _ in range(max_iter):
        d2 = np.square(points[:, None, :] - centers[None, :, :]).sum(axis=2)
        assign = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for c in range(k):
            members = points[assign == c]
            if len(members):
                new_centers[c] = members.mean(axis=0)
            else:
                # empty cluster: seize the point farthest from its center
                far = int(np.argmax(d2[np.arange(len(points)), assign]))
                new_centers[c] = points[far]
                assign[far] = c
        shift = np.sqrt(np.square(new_centers - centers).sum(axis=1)).max()
        centers = new_centers
        if shift < tol:
            break
    d2 = np.square(points[:, None, :] - centers[None, :, :]).sum(axis=2)
    assign = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(points)), assign].sum())
    return assign, inertia


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> np.ndarray:
    """K-means++ / Lloyd clustering; best inertia over seeded restarts."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ParameterError("points must be 2D (n, d)")
    if not 1 <= k <= len(pts):
        raise ParameterError(f"k must be in [1, N={len(pts)}], got {k}")
    rng = np.random.default_rng(seed)
    best_assign, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(pts, k, rng)
        assign, inertia = _lloyd(pts, centers, max_iter, tol)
        if inertia < best_inertia:
            best_assign, best_inertia = assign, inertia
    return best_assign


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def _factorize(values) -> tuple[np.ndarray, int]:
    mapping: dict = {}
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        out[i] = mapping.setdefault(v, len(mapping))
    return out, len(mapping)


def homogeneity_completeness(clusters, labels) -> tuple[float, float]:
    """Entropy-based cluster purity scores, natural log.

    h = 1 - H(class|cluster)/H(class) and c = 1 - H(cluster|class)/H(cluster),
    with h = 1 when H(class) = 0 and c = 1 when H(cluster) = 0. Swapping
    the arguments swaps the two scores.
    """
    clusters = list(clusters)
    labels = list(labels)
    if len(clusters) != len(labels):
        raise ParameterError(f"length mismatch: {len(clusters)} clusters vs {len(labels)} labels")
    if not clusters:
        raise ParameterError("need at least one point")
    n = len(clusters)

    k_ids, n_k = _factorize(clusters)
    c_ids, n_c = _factorize(labels)
    contingency = np.zeros((n_k, n_c))
    np.add.at(contingency, (k_ids, c_ids), 1.0)

    h_class = _entropy(contingency.sum(axis=0))
    h_cluster = _entropy(contingency.sum(axis=1))

    nz = contingency > 0
    joint = contingency / n
    row_sums = contingency.sum(axis=1, keepdims=True)
    col_sums = contingency.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        # H(class | cluster) = -sum_{k,c} p(k,c) ln(n_kc / n_k), and symmetrically
        h_class_given_cluster = float(-(joint[nz] * np.log((contingency / row_sums)[nz])).sum())
        h_cluster_given_class = float(-(joint[nz] * np.log((contingency / col_sums)[nz])).sum())

    h = 1.0 if h_class == 0 else 1.0 - h_class_given_cluster / h_class
    c = 1.0 if h_cluster == 0 else 1.0 - h_cluster_given_class / h_cluster
    return h, c


def time_gain(video_minutes: float, annotation_minutes: float) -> int:
    """Whole-number speedup factor of annotation over video duration."""
    if annotation_minutes <= 0:
        raise ParameterError(f"annotation_minutes must be positive, got {annotation_minutes}")
    if video_minutes < 0:
        raise ParameterError(f"video_minutes must be nonnegative, got {video_minutes}")
    return int(math.floor(video_minutes / annotation_minutes))


def compute_report(
    points: np.ndarray,
    labels,
    knn_k: int = 4,
    seed: int = 0,
    video_minutes: float | None = None,
    annotation_minutes: float | None = None,
) -> MetricsReport:
    """Full metrics report for a labeled subset of an embedding."""
    labels = list(labels)
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    report = MetricsReport(per_class_counts=counts)

    if len(labels) >= 2:
        report.knn_k = min(knn_k, len(labels) - 1)
        report.knn_accuracy = knn_accuracy(points, labels, k=knn_k)
        k = len(counts)
        report.kmeans_k = k
        clusters = kmeans(points, k, seed=seed)
        h, c = homogeneity_completeness(clusters, labels)
        report.homogeneity = h
        report.completeness = c
    if video_minutes is not None and annotation_minutes and annotation_minutes > 0:
        report.time_gain = time_gain(video_minutes, annotation_minutes)
    return report
