"""Two-component PCA baseline for comparing against the t-SNE map."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .tsne import Embedding


def pca2(features: np.ndarray) -> Embedding:
    """Mean-centered projection onto the top-2 principal directions.

    Component variances come out in descending order. On rank-deficient
    input the second direction is an arbitrary (but deterministic) unit
    vector orthogonal to the first; with one input column the second
    coordinate is identically zero.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ParameterError("pca2 needs an (n >= 2, d) feature matrix")

    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2]
    if comps.shape[0] < 2:
        comps = np.vstack([comps, np.zeros((2 - comps.shape[0], x.shape[1]))])

    # stable sign: largest-magnitude loading of each component is positive
    for row in comps:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0

    return Embedding(points=centered @ comps.T, kl_trace=[], config=None)
