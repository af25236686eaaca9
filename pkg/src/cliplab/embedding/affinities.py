"""Input-space similarities: exact kNN, bandwidth calibration, joint P.

Each point's Gaussian bandwidth is bisected until the conditional
distribution over its 3*perplexity nearest neighbors hits the target
perplexity (2^entropy, entropy in bits). Conditionals are then
symmetrized to p_ij = (p_j|i + p_i|j) / (2N), a sparse matrix summing
to one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import DegenerateInputError, ParameterError

log = logging.getLogger(__name__)

PERPLEXITY_TOL = 1e-5
MAX_BISECTIONS = 50
_KNN_CHUNK = 256


@dataclass(frozen=True)
class AffinityMatrix:
    """Sparse symmetric joint probabilities with per-point bandwidths."""

    probabilities: sp.csr_matrix  # N x N, p_ij = p_ji >= 0, sums to 1
    sigmas: np.ndarray            # per-point Gaussian bandwidth
    perplexity: float

    @property
    def n_points(self) -> int:
        return self.probabilities.shape[0]


def neighbor_count(perplexity: float, n_points: int) -> int:
    return min(int(3 * perplexity), n_points - 1)


def knn_distances(features: np.ndarray, k_nn: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors per point with squared Euclidean distances.

    Returns (indices, d2), both (N, k_nn), rows sorted ascending by
    distance with ties broken by index. Self is excluded.
    """
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 0 < k_nn < n:
        raise ParameterError(f"k_nn must be in [1, N-1]={n - 1}, got {k_nn}")

    sq = np.einsum("ij,ij->i", x, x)
    indices = np.empty((n, k_nn), dtype=np.int64)
    d2 = np.empty((n, k_nn), dtype=np.float64)
    for start in range(0, n, _KNN_CHUNK):
        stop = min(start + _KNN_CHUNK, n)
        block = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        np.maximum(block, 0.0, out=block)
        for r in range(stop - start):
            block[r, start + r] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k_nn]
        indices[start:stop] = order
        d2[start:stop] = np.take_along_axis(block, order, axis=1)
    return indices, d2


def _row_entropy_bits(d2: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entropy (bits) and probabilities of p_j ~ exp(-d2_j * beta), rows at once."""
    shifted = d2 - d2.min(axis=1, keepdims=True)
    w = np.exp(-shifted * beta[:, None])
    s = w.sum(axis=1)
    p = w / s[:, None]
    # H = ln(S) + beta * E[d] over the shifted distances, then to bits
    h_nats = np.log(s) + beta * np.einsum("ij,ij->i", shifted, p)
    return h_nats / math.log(2.0), p


def _bisect_betas(d2: np.ndarray, perplexity: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row bisection of beta = 1/(2 sigma^2) to the target perplexity.

    Converged rows freeze their beta; unconverged rows clamp at the value
    reached after MAX_BISECTIONS updates.
    """
    n = d2.shape[0]
    beta = np.ones(n)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)

    for _ in range(MAX_BISECTIONS):
        entropy, _ = _row_entropy_bits(d2, beta)
        diff = np.exp2(entropy) - perplexity
        active = np.abs(diff) > PERPLEXITY_TOL
        if not active.any():
            break
        # perplexity too high -> distribution too flat -> raise beta
        too_high = active & (diff > 0)
        lo[too_high] = beta[too_high]
        beta[too_high] = np.where(np.isinf(hi[too_high]), beta[too_high] * 2.0,
                                  (beta[too_high] + hi[too_high]) / 2.0)
        too_low = active & (diff < 0)
        hi[too_low] = beta[too_low]
        beta[too_low] = np.where(np.isinf(lo[too_low]), beta[too_low] / 2.0,
                                 (beta[too_low] + lo[too_low]) / 2.0)
    _, p = _row_entropy_bits(d2, beta)
    return beta, p


def sigma_search(distances: np.ndarray, perplexity: float) -> float:
    """Calibrate one point's Gaussian bandwidth to the target perplexity.

    ``distances`` are squared distances to the point's neighbors. Returns
    sigma such that p_j ~ exp(-d_j / (2 sigma^2)) has perplexity within
    1e-5 of the target, or the best bandwidth after 50 bisection steps.
    """
    d2 = np.asarray(distances, dtype=np.float64).reshape(1, -1)
    if d2.shape[1] < 2:
        raise ParameterError("need at least 2 neighbor distances")
    if np.all(d2 == 0):
        raise DegenerateInputError("all neighbor distances are zero")
    beta, _ = _bisect_betas(d2, perplexity)
    return float(np.sqrt(1.0 / (2.0 * beta[0])))


def conditional_probabilities(
    d2: np.ndarray, perplexity: float
) -> tuple[np.ndarray, np.ndarray]:
    """Row-stochastic conditional p_j|i over each point's neighbor list.

    Returns (P_cond, sigmas); P_cond row i aligns with the i-th neighbor
    index row that produced ``d2``.
    """
    beta, p = _bisect_betas(np.asarray(d2, dtype=np.float64), perplexity)
    return p, np.sqrt(1.0 / (2.0 * beta))


def joint_affinities(features: np.ndarray, perplexity: float, seed: int = 0) -> AffinityMatrix:
    """Sparse symmetric joint probabilities over 3*perplexity neighbors."""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if perplexity < 1:
        raise ParameterError(f"perplexity must be >= 1, got {perplexity}")
    if n <= 3 * perplexity:
        raise ParameterError(
            f"need N > 3*perplexity ({3 * perplexity:g}); got N={n}. Lower the perplexity."
        )
    k_nn = neighbor_count(perplexity, n)
    idx, d2 = knn_distances(x, k_nn)

    if np.any(d2[:, 0] == 0):
        # coincident points: deterministic jitter, then rebuild the kNN
        rng = np.random.default_rng(seed)
        dup = int(np.count_nonzero(d2[:, 0] == 0))
        log.warning("%d coincident point(s); applying 1e-8 jitter before affinities", dup)
        x = x + rng.normal(scale=1e-8, size=x.shape)
        idx, d2 = knn_distances(x, k_nn)

    p_cond, sigmas = conditional_probabilities(d2, perplexity)

    rows = np.repeat(np.arange(n, dtype=np.int64), k_nn)
    cond = sp.csr_matrix((p_cond.ravel(), (rows, idx.ravel())), shape=(n, n))
    joint = (cond + cond.T) / (2.0 * n)
    joint.sort_indices()
    return AffinityMatrix(probabilities=joint, sigmas=sigmas, perplexity=float(perplexity))
