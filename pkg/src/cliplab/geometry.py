"""Lasso geometry: even-odd point-in-polygon with inclusive boundaries."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LassoPolygon:
    """Ordered polygon vertices, implicitly closed."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValidationError(f"polygon needs >= 3 vertices, got {len(self.vertices)}")
        arr = np.asarray(self.vertices, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
            raise ValidationError("polygon vertices must be finite (x, y) pairs")

    @classmethod
    def from_list(cls, vertices) -> "LassoPolygon":
        return cls(tuple((float(x), float(y)) for x, y in vertices))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def area(self) -> float:
        """Shoelace area (absolute)."""
        v = self.as_array()
        x, y = v[:, 0], v[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def points_in_polygon(points: np.ndarray, polygon: LassoPolygon) -> np.ndarray:
    """Boolean mask of points inside the polygon.

    Even-odd crossing rule; points exactly on an edge or vertex count as
    inside. A zero-area polygon selects nothing (logged as a warning).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be an (n, 2) array")
    if polygon.area() == 0.0:
        log.warning("degenerate zero-area lasso polygon; empty selection")
        return np.zeros(len(pts), dtype=bool)

    verts = polygon.as_array()
    px, py = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    on_edge = np.zeros(len(pts), dtype=bool)

    n = len(verts)
    for k in range(n):
        x1, y1 = verts[k]
        x2, y2 = verts[(k + 1) % n]

        # boundary: collinear with the edge and within its bounding box
        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        within = (
            (px >= min(x1, x2)) & (px <= max(x1, x2))
            & (py >= min(y1, y2)) & (py <= max(y1, y2))
        )
        on_edge |= (cross == 0.0) & within

        # even-odd: does the edge cross the horizontal ray to +x?
        crosses = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < x_at)

    return inside | on_edge
