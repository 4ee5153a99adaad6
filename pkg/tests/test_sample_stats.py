import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cluster_conquer.exceptions import Domain_Error, Insufficient_Observations_Error
from cluster_conquer.statistics.Covariance_Estimate import Covariance_Method, shrinkage_from_sample
from cluster_conquer.statistics.Sample_Store import Sample_Store
from cluster_conquer.statistics.correlation_tests import fisher_z, meng_term, meng_variance


@pytest.fixture
def rows() -> np.ndarray:
    return np.random.default_rng(0).normal(size=(40, 4))


class TestSampleStore:

    def test_counts_after_full_rows(self):
        store = Sample_Store.from_observations(np.arange(6.0).reshape(3, 2))
        assert_array_equal(store.counts, [3, 3])
        assert store.full_count == 3
        assert_allclose(store.means, [2.0, 3.0])
        assert_allclose(store.variances, [4.0, 4.0])

    def test_partial_update_skips_comoments(self):
        store = Sample_Store.from_observations(np.arange(6.0).reshape(3, 2))
        store.add(1, [10.0, 11.0])
        assert_array_equal(store.counts, [3, 5])
        assert store.full_count == 3
        assert store.partial_batches == 1

    def test_sequential_matches_batch(self, rows):
        batch = Sample_Store.from_observations(rows)
        sequential = Sample_Store(4)
        for start in range(0, 40, 7):
            sequential.update(rows[start:start + 7])
        assert_allclose(sequential.means, batch.means)
        assert_allclose(sequential.variances, batch.variances)
        assert_allclose(sequential.full_vector_covariance(), np.cov(rows, rowvar=False))

    def test_merge_matches_sequential(self, rows):
        merged = Sample_Store.from_observations(rows[:15]).merge(Sample_Store.from_observations(rows[15:]))
        assert_array_equal(merged.counts, np.full(4, 40))
        assert_allclose(merged.means, rows.mean(axis=0))
        assert_allclose(merged.variances, rows.var(axis=0, ddof=1))
        assert_allclose(merged.full_vector_covariance(), np.cov(rows, rowvar=False))

    def test_two_point_covariance(self):
        store = Sample_Store.from_observations(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert_allclose(store.full_vector_covariance(), [[0.5, 0.5], [0.5, 0.5]])

    def test_snapshot_is_independent(self, rows):
        store = Sample_Store.from_observations(rows[:10])
        snapshot = store.snapshot()
        store.update(rows[10:])
        assert_array_equal(snapshot.counts, np.full(4, 10))

    def test_insufficient_observations(self):
        store = Sample_Store.from_observations(np.ones((1, 3)))
        with pytest.raises(Insufficient_Observations_Error):
            _ = store.means
        with pytest.raises(Insufficient_Observations_Error):
            store.full_vector_covariance()

    def test_ranking(self):
        store = Sample_Store.from_observations(np.array([[1.0, 3.0, 2.0], [1.0, 3.0, 2.0]]))
        assert store.best_mean_index() == 1
        assert store.alternatives_above(0) == [1, 2]
        assert store.alternatives_above(2) == [1]
        assert store.alternatives_above(1) == []

    def test_ranking_ties_prefer_lowest_index(self):
        store = Sample_Store.from_observations(np.array([[1.0, 2.0, 2.0], [1.0, 2.0, 2.0]]))
        assert store.best_mean_index() == 1
        assert store.alternatives_above(2) == []

    def test_ranking_follows_updates(self):
        store = Sample_Store.from_observations(np.array([[1.0, 3.0], [1.0, 3.0]]))
        store.add(0, [20.0, 20.0])
        assert store.best_mean_index() == 0
        assert store.alternatives_above(1) == [0]

    def test_plug_in_covariance(self):
        store = Sample_Store.from_observations(np.array([[0.0, 0.0], [2.0, 4.0]]))
        covariance = store.plug_in_covariance(np.array([[1.0, 0.5], [0.5, 1.0]]))
        assert_allclose(covariance, [[2.0, 2.0], [2.0, 8.0]])


class TestCovarianceEstimates:

    def test_sample_estimator(self, rows):
        estimate = Covariance_Method.Sample(Sample_Store.from_observations(rows))
        assert_allclose(estimate.matrix, np.cov(rows, rowvar=False))
        correlation = estimate.correlation()
        assert_allclose(np.diag(correlation), 1.0)
        assert_allclose(correlation, np.corrcoef(rows, rowvar=False), atol=1e-12)

    def test_shrinkage_is_positive_semi_definite(self, rows):
        estimate = Covariance_Method.Shrinkage(Sample_Store.from_observations(rows))
        assert estimate.matrix.shape == (4, 4)
        assert np.linalg.eigvalsh(estimate.matrix)[0] >= -1e-10
        assert estimate.metadata["p_exceeds_n"] is False

    def test_shrinkage_pulls_eigenvalues_together(self):
        observations = np.random.default_rng(2).normal(size=(30, 20))
        estimate = Covariance_Method.Shrinkage(Sample_Store.from_observations(observations))
        assert np.ptp(estimate.shrunk_eigenvalues) < np.ptp(estimate.eigenvalues)

    def test_shrinkage_needs_four_observations(self):
        with pytest.raises(Insufficient_Observations_Error):
            shrinkage_from_sample(np.eye(2), 3)

    def test_shrinkage_of_zero_matrix(self):
        with pytest.raises(Domain_Error):
            shrinkage_from_sample(np.zeros((3, 3)), 10)


class TestCorrelationTests:

    def test_fisher_z(self):
        assert fisher_z(0.5) == pytest.approx(0.549306, abs=1e-6)
        assert fisher_z(0.0) == 0.0
        assert_allclose(fisher_z(np.array([-0.5, 0.5])), [-0.549306, 0.549306], atol=1e-6)

    def test_fisher_z_domain(self):
        with pytest.raises(Domain_Error):
            fisher_z(1.0)
        with pytest.raises(ValueError):
            fisher_z(-1.5)

    def test_meng_variance_of_uncorrelated_pair(self):
        assert meng_variance(0.0, 0.3, 0.0, 103) == pytest.approx(0.02)

    def test_meng_term_caps_f(self):
        # f = (1 - r_bc) / (2 (1 - mean square)) exceeds 1 here, so h collapses to 1
        assert meng_term(0.0, -0.9) == pytest.approx(1.9)
        assert meng_term(0.5, 0.5) == pytest.approx(0.5 * (1.0 - 0.25 / 3.0) / 0.75)

    def test_meng_variance_needs_more_than_three(self):
        with pytest.raises(Domain_Error):
            meng_variance(0.1, 0.2, 0.3, 3)

    def test_meng_variance_domain(self):
        with pytest.raises(Domain_Error):
            meng_variance(1.0, 0.2, 0.3, 50)
