import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.spatial.distance import cdist

from cliplab.embedding import (
    conditional_probabilities,
    joint_affinities,
    knn_distances,
    neighbor_count,
    sigma_search,
)
from cliplab.errors import DegenerateInputError, ParameterError


def brute_force_knn(features, k):
    """O(N^2) oracle: full distance matrix + per-row stable sort."""
    d2 = cdist(features, features, "sqeuclidean")
    np.fill_diagonal(d2, np.inf)
    idx = np.empty((len(features), k), dtype=int)
    out_d2 = np.empty((len(features), k))
    for i in range(len(features)):
        order = sorted(range(len(features)), key=lambda j: (d2[i, j], j))
        idx[i] = order[:k]
        out_d2[i] = d2[i, order[:k]]
    return idx, out_d2


def perplexity_of(d2, sigma):
    d2 = np.asarray(d2, dtype=float)
    p = np.exp(-(d2 - d2.min()) / (2 * sigma**2))  # shift-invariant, avoids underflow
    p = p / p.sum()
    h = -(p[p > 0] * np.log2(p[p > 0])).sum()
    return 2.0**h


class TestKnnDistances:
    def test_collinear(self):
        feats = np.array([[0.0], [1.0], [3.0]])
        idx, d2 = knn_distances(feats, 1)
        assert idx[:, 0].tolist() == [1, 0, 1]
        assert d2[:, 0].tolist() == [1.0, 1.0, 4.0]

    def test_duplicates_tie_by_index(self):
        feats = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
        idx, d2 = knn_distances(feats, 2)
        assert d2[0].tolist() == [0.0, 0.0]
        assert idx[0].tolist() == [1, 2]  # lowest index first
        assert idx[1].tolist() == [0, 2]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        feats = rng.normal(size=(100, 6))
        idx, d2 = knn_distances(feats, 5)
        oracle_idx, oracle_d2 = brute_force_knn(feats, 5)
        np.testing.assert_array_equal(idx, oracle_idx)
        np.testing.assert_allclose(d2, oracle_d2, rtol=0, atol=1e-9)

    def test_k_too_large(self):
        with pytest.raises(ParameterError):
            knn_distances(np.zeros((4, 2)), 4)


class TestSigmaSearch:
    def test_two_equal_distances(self):
        sigma = sigma_search(np.array([4.0, 4.0]), 2.0)
        assert perplexity_of([4.0, 4.0], sigma) == pytest.approx(2.0, abs=1e-9)

    def test_bisection_oracle(self):
        d2 = np.array([1.0, 4.0, 9.0])
        sigma = sigma_search(d2, 2.0)
        assert perplexity_of(d2, sigma) == pytest.approx(2.0, abs=1e-5)
        # independent root finder on the same entropy curve
        oracle_sigma = brentq(lambda s: perplexity_of(d2, s) - 2.0, 1e-3, 1e3, xtol=1e-12)
        assert perplexity_of(d2, oracle_sigma) == pytest.approx(perplexity_of(d2, sigma), abs=1e-5)

    def test_perplexity_one_clamps(self):
        d2 = np.array([1.0, 4.0, 9.0])
        sigma = sigma_search(d2, 1.0)
        assert perplexity_of(d2, sigma) <= 1.0 + 1e-3

    def test_all_zero_distances(self):
        with pytest.raises(DegenerateInputError):
            sigma_search(np.zeros(3), 2.0)

    def test_single_distance_rejected(self):
        with pytest.raises(ParameterError):
            sigma_search(np.array([1.0]), 2.0)


class TestJointAffinities:
    def test_global_sum_and_symmetry(self):
        rng = np.random.default_rng(0)
        feats = rng.normal(size=(60, 5))
        aff = joint_affinities(feats, 8.0)
        p = aff.probabilities
        assert abs(p.sum() - 1.0) < 1e-9
        assert abs(p - p.T).max() == 0.0
        assert p.min() >= 0.0
        assert np.abs(p.diagonal()).max() == 0.0

    def test_conditional_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        feats = rng.normal(size=(50, 4))
        k = neighbor_count(6.0, 50)
        _, d2 = knn_distances(feats, k)
        p_cond, sigmas = conditional_probabilities(d2, 6.0)
        np.testing.assert_allclose(p_cond.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(sigmas > 0)
        assert p_cond.shape[1] == k  # at most 3*perplexity stored neighbors

    def test_two_far_pairs(self):
        # two tight pairs far apart: within-pair mass dominates
        feats = np.array([[0.0, 0.0], [0.1, 0.0], [100.0, 0.0], [100.1, 0.0]])
        aff = joint_affinities(feats, 1.01)
        p = aff.probabilities.toarray()
        within = p[0, 1] + p[2, 3]
        cross = p[0, 2] + p[0, 3] + p[1, 2] + p[1, 3]
        assert within > 100 * cross

        # dense-formula oracle over the same neighbor structure
        d2 = cdist(feats, feats, "sqeuclidean")
        cond = np.zeros((4, 4))
        for i in range(4):
            others = [j for j in range(4) if j != i][: neighbor_count(1.01, 4)]
            sigma = sigma_search(d2[i, others], 1.01)
            w = np.exp(-d2[i, others] / (2 * sigma**2))
            cond[i, others] = w / w.sum()
        oracle = (cond + cond.T) / (2 * 4)
        np.testing.assert_allclose(p, oracle, atol=1e-12)

    def test_row_perplexities_hit_target(self):
        rng = np.random.default_rng(2)
        feats = rng.normal(size=(120, 10))
        target = 12.0
        k = neighbor_count(target, 120)
        _, d2 = knn_distances(feats, k)
        p_cond, _ = conditional_probabilities(d2, target)
        h = -(p_cond * np.log2(np.where(p_cond > 0, p_cond, 1.0))).sum(axis=1)
        np.testing.assert_allclose(np.exp2(h), target, atol=1e-4)

    def test_too_small_n(self):
        with pytest.raises(ParameterError, match="perplexity"):
            joint_affinities(np.zeros((10, 3)), 5.0)

    def test_duplicate_points_jittered(self, caplog):
        rng = np.random.default_rng(3)
        feats = rng.normal(size=(40, 3))
        feats[7] = feats[3]  # exact duplicate
        with caplog.at_level("WARNING"):
            aff = joint_affinities(feats, 5.0, seed=9)
        assert abs(aff.probabilities.sum() - 1.0) < 1e-9
        assert any("jitter" in r.message for r in caplog.records)
