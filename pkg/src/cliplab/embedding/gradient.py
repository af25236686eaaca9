"""KL-divergence gradient of the 2D map, exact and Barnes-Hut.

The low-dimensional kernel is the Student-t with one degree of freedom,
q~_ij = 1 / (1 + |y_i - y_j|^2), normalized by Z = sum over all ordered
pairs. The gradient splits into an attraction term over the sparse P and
a repulsion term which Barnes-Hut approximates through quadtree cells.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit

from ..errors import ValidationError
from .affinities import AffinityMatrix
from .quadtree import QuadTree


def _as_csr(p) -> sp.csr_matrix:
    if isinstance(p, AffinityMatrix):
        return p.probabilities
    if sp.issparse(p):
        return p.tocsr()
    return sp.csr_matrix(np.asarray(p, dtype=np.float64))


def _as_dense(p) -> np.ndarray:
    if isinstance(p, AffinityMatrix):
        return p.probabilities.toarray()
    if sp.issparse(p):
        return p.toarray()
    return np.asarray(p, dtype=np.float64)


@njit(cache=True)
def _attraction(indptr, indices, data, points, out):
    n = points.shape[0]
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        fx = 0.0
        fy = 0.0
        for s in range(indptr[i], indptr[i + 1]):
            j = indices[s]
            dx = px - points[j, 0]
            dy = py - points[j, 1]
            w = data[s] / (1.0 + dx * dx + dy * dy)
            fx += w * dx
            fy += w * dy
        out[i, 0] = fx
        out[i, 1] = fy


@njit(cache=True)
def _kl_csr(indptr, indices, data, points, z):
    total = 0.0
    n = points.shape[0]
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        for s in range(indptr[i], indptr[i + 1]):
            p = data[s]
            if p <= 0.0:
                continue
            j = indices[s]
            dx = px - points[j, 0]
            dy = py - points[j, 1]
            q = 1.0 / (1.0 + dx * dx + dy * dy) / z
            total += p * np.log(p / q)
    return total


def exact_gradient(p, points: np.ndarray) -> np.ndarray:
    """Dense O(N^2) gradient of KL(P || Q) at the given 2D coordinates."""
    y = np.asarray(points, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValidationError("points must be finite")
    pm = _as_dense(p)
    n = len(y)

    d2 = np.square(y[:, None, :] - y[None, :, :]).sum(axis=2)
    qt = 1.0 / (1.0 + d2)
    np.fill_diagonal(qt, 0.0)
    z = qt.sum()
    pq = (pm - qt / z) * qt
    return 4.0 * (pq.sum(axis=1)[:, None] * y - pq @ y)


def bh_gradient_and_z(p, points: np.ndarray, theta: float) -> tuple[np.ndarray, float]:
    """Barnes-Hut gradient plus the traversal's Z estimate (exact at theta=0)."""
    y = np.ascontiguousarray(points, dtype=np.float64)
    csr = _as_csr(p)
    attr = np.zeros_like(y)
    _attraction(csr.indptr, csr.indices.astype(np.int64), csr.data, y, attr)
    rep, z = QuadTree(y).repulsion(theta)
    if z > 0:
        rep = rep / z
    return 4.0 * (attr - rep), z


def bh_gradient(p, points: np.ndarray, theta: float) -> np.ndarray:
    """Gradient with quadtree-approximated repulsion; theta=0 is exact."""
    grad, _ = bh_gradient_and_z(p, points, theta)
    return grad


def kl_divergence(p, points: np.ndarray) -> float:
    """Exact KL(P || Q) over the nonzeros of P (dense Z normalization)."""
    y = np.asarray(points, dtype=np.float64)
    d2 = np.square(y[:, None, :] - y[None, :, :]).sum(axis=2)
    qt = 1.0 / (1.0 + d2)
    np.fill_diagonal(qt, 0.0)
    z = qt.sum()
    csr = _as_csr(p)
    return float(_kl_csr(csr.indptr, csr.indices.astype(np.int64), csr.data, y, z))


def kl_divergence_with_z(p, points: np.ndarray, z: float) -> float:
    """KL(P || Q) reusing a Z estimate from a Barnes-Hut traversal."""
    y = np.ascontiguousarray(points, dtype=np.float64)
    csr = _as_csr(p)
    return float(_kl_csr(csr.indptr, csr.indices.astype(np.int64), csr.data, y, z))
