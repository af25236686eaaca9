"""Quadtree over 2D points for Barnes-Hut repulsion estimates.

The tree is stored as flat arrays (filled by numba kernels): per node a
center/half-width square, an aggregated mass (point count) and center of
mass, four lazily created children, and, for leaves, a linked chain of
point indices. Exact duplicates and overly deep splits chain inside one
leaf instead of subdividing forever.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import ValidationError

MAX_DEPTH = 48
MIN_HALF = 1e-12
_STACK = 4096


@njit(cache=True)
def _build(points, cx0, cy0, half0, capacity, max_depth, min_half):
    n = points.shape[0]
    center = np.zeros((capacity, 2))
    half = np.zeros(capacity)
    com = np.zeros((capacity, 2))
    count = np.zeros(capacity, np.int64)
    children = np.full((capacity, 4), -1, np.int64)
    split = np.zeros(capacity, np.uint8)
    leaf_head = np.full(capacity, -1, np.int64)
    nxt = np.full(n, -1, np.int64)

    center[0, 0] = cx0
    center[0, 1] = cy0
    half[0] = half0
    n_nodes = 1

    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        node = 0
        depth = 0
        count[0] += 1
        com[0, 0] += px
        com[0, 1] += py
        while True:
            if split[node] == 1:
                q = 0
                if px > center[node, 0]:
                    q += 1
                if py > center[node, 1]:
                    q += 2
                child = children[node, q]
                if child == -1:
                    if n_nodes >= capacity:
                        return -1, center, half, com, count, children, split, leaf_head, nxt
                    child = n_nodes
                    n_nodes += 1
                    h = half[node] * 0.5
                    center[child, 0] = center[node, 0] + (h if q & 1 else -h)
                    center[child, 1] = center[node, 1] + (h if q & 2 else -h)
                    half[child] = h
                    children[node, q] = child
                node = child
                depth += 1
                count[node] += 1
                com[node, 0] += px
                com[node, 1] += py
            else:
                if leaf_head[node] == -1:
                    leaf_head[node] = i
                    break
                if depth >= max_depth or half[node] <= min_half:
                    nxt[i] = leaf_head[node]
                    leaf_head[node] = i
                    break
                # occupied single-point leaf: push the occupant one level down
                j = leaf_head[node]
                leaf_head[node] = -1
                split[node] = 1
                qj = 0
                if points[j, 0] > center[node, 0]:
                    qj += 1
                if points[j, 1] > center[node, 1]:
                    qj += 2
                if n_nodes >= capacity:
                    return -1, center, half, com, count, children, split, leaf_head, nxt
                cj = n_nodes
                n_nodes += 1
                h = half[node] * 0.5
                center[cj, 0] = center[node, 0] + (h if qj & 1 else -h)
                center[cj, 1] = center[node, 1] + (h if qj & 2 else -h)
                half[cj] = h
                children[node, qj] = cj
                count[cj] = 1
                com[cj, 0] += points[j, 0]
                com[cj, 1] += points[j, 1]
                leaf_head[cj] = j
                # loop again: the node is split now, the new point descends

    return n_nodes, center, half, com, count, children, split, leaf_head, nxt


@njit(cache=True)
def _repulsion(points, center, half, com, count, children, split, leaf_head, nxt,
               theta, forces):
    """Barnes-Hut repulsion numerators per point; returns the global Z sum.

    A cell is summarized when width/distance < theta, otherwise its
    children are visited; leaves use exact pairwise terms.
    """
    n = points.shape[0]
    theta2 = theta * theta
    z_total = 0.0
    stack = np.empty(_STACK, np.int64)

    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        fx = 0.0
        fy = 0.0
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            cnt = count[node]
            if cnt == 0:
                continue
            if split[node] == 0:
                j = leaf_head[node]
                while j != -1:
                    if j != i:
                        dx = px - points[j, 0]
                        dy = py - points[j, 1]
                        q = 1.0 / (1.0 + dx * dx + dy * dy)
                        z_total += q
                        fx += q * q * dx
                        fy += q * q * dy
                    j = nxt[j]
            else:
                mx = com[node, 0] / cnt
                my = com[node, 1] / cnt
                dx = px - mx
                dy = py - my
                d2 = dx * dx + dy * dy
                w = 2.0 * half[node]
                if w * w < theta2 * d2:
                    q = 1.0 / (1.0 + d2)
                    z_total += cnt * q
                    qq = cnt * q * q
                    fx += qq * dx
                    fy += qq * dy
                else:
                    for c in range(4):
                        ch = children[node, c]
                        if ch != -1:
                            stack[top] = ch
                            top += 1
        forces[i, 0] = fx
        forces[i, 1] = fy
    return z_total


class QuadTree:
    """Spatial partition of a fixed 2D point set."""

    def __init__(self, points: np.ndarray):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValidationError("points must be an (n, 2) array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points must be finite")
        self.points = pts
        n = len(pts)
        if n == 0:
            raise ValidationError("cannot build a quadtree over zero points")

        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        cx, cy = (lo + hi) / 2.0
        half0 = max(float((hi - lo).max()) * 0.5 * (1.0 + 1e-9), MIN_HALF)

        capacity = max(64, 8 * n)
        while True:
            out = _build(pts, cx, cy, half0, capacity, MAX_DEPTH, MIN_HALF)
            if out[0] != -1:
                break
            capacity *= 2
        (self.n_nodes, self._center, self._half, self._com_sum, self._count,
         self._children, self._split, self._leaf_head, self._next) = out

    # -- introspection used by invariant tests ------------------------------
    @property
    def node_count(self) -> int:
        return int(self.n_nodes)

    def mass(self, node: int) -> int:
        return int(self._count[node])

    def center_of_mass(self, node: int) -> np.ndarray:
        return self._com_sum[node] / self._count[node]

    def children_of(self, node: int) -> list[int]:
        return [int(c) for c in self._children[node] if c != -1]

    def is_leaf(self, node: int) -> bool:
        return self._split[node] == 0

    def leaf_points(self, node: int) -> list[int]:
        out = []
        j = int(self._leaf_head[node])
        while j != -1:
            out.append(j)
            j = int(self._next[j])
        return out

    # -- forces --------------------------------------------------------------
    def repulsion(self, theta: float) -> tuple[np.ndarray, float]:
        """Unnormalized repulsion numerators for every point and the Z sum."""
        if not 0.0 <= theta <= 1.0:
            raise ValidationError(f"theta must be in [0, 1], got {theta}")
        forces = np.zeros_like(self.points)
        z = _repulsion(
            self.points, self._center, self._half, self._com_sum, self._count,
            self._children, self._split, self._leaf_head, self._next,
            float(theta), forces,
        )
        return forces, float(z)
