"""Dimensionality reduction: Barnes-Hut t-SNE and a PCA baseline."""

from .affinities import (
    AffinityMatrix,
    conditional_probabilities,
    joint_affinities,
    knn_distances,
    neighbor_count,
    sigma_search,
)
from .gradient import bh_gradient, bh_gradient_and_z, exact_gradient, kl_divergence
from .pca import pca2
from .quadtree import QuadTree
from .tsne import Embedding, TsneConfig, run_tsne

__all__ = [
    "AffinityMatrix",
    "Embedding",
    "QuadTree",
    "TsneConfig",
    "bh_gradient",
    "bh_gradient_and_z",
    "conditional_probabilities",
    "exact_gradient",
    "joint_affinities",
    "kl_divergence",
    "knn_distances",
    "neighbor_count",
    "pca2",
    "run_tsne",
    "sigma_search",
]
