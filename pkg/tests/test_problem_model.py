import logging

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cluster_conquer.exceptions import Factorization_Error, Problem_Construction_Error
from cluster_conquer.problems.Problem_Spec import Model_Kind, Problem_Spec
from cluster_conquer.problems.fixtures import (CORRELATION_GRID_REFERENCE, FIXTURES, NOT_POSITIVE_DEFINITE_CELL, correlation_grid_settings,
                                               fixture_covariance, resolve_fixture, sample_size_settings)
from cluster_conquer.problems.problem_builders import (Block_Model_Spec, Free_Wilson_Spec, build_block_model, build_free_wilson,
                                                       desk_free_wilson_spec)
from cluster_conquer.problems.simulation import (Replication_Stream, derive_seed, export_observations_csv, simulate,
                                                 symmetric_factor)


class TestBlockModel:

    def test_covariance_entries(self):
        spec = build_block_model(Block_Model_Spec(cluster_sizes=[2, 2], intra_corr=0.5, inter_corr=0.1, variance=2.0))
        assert spec.p == 4
        assert spec.k == 2
        assert_array_equal(spec.partition, [0, 0, 1, 1])
        assert_allclose(np.diag(spec.sigma), 2.0)
        assert spec.sigma[0, 1] == pytest.approx(1.0)
        assert spec.sigma[0, 2] == pytest.approx(0.2)
        assert spec.sigma[1, 3] == pytest.approx(0.2)
        assert spec.model_kind is Model_Kind.Block

    def test_mean_layout(self):
        spec = build_block_model(Block_Model_Spec(cluster_sizes=[2, 3], intra_corr=0.5, inter_corr=0.1))
        assert_allclose(spec.mu, [1.0, 0.0, 0.9, 0.0, 0.0])
        assert spec.best_index == 0

    def test_equal_correlations_violate_separation(self, caplog):
        with caplog.at_level(logging.WARNING):
            spec = build_block_model(Block_Model_Spec(cluster_sizes=[3, 3], intra_corr=0.3, inter_corr=0.3))
        assert not spec.satisfies_assumption_one()
        assert "indistinguishable" in caplog.text

    def test_separated_blocks_satisfy_separation(self):
        spec = build_block_model(Block_Model_Spec(cluster_sizes=[3, 3], intra_corr=0.5, inter_corr=0.2))
        assert spec.satisfies_assumption_one()

    def test_inter_above_intra_rejected(self):
        with pytest.raises(Problem_Construction_Error) as error:
            build_block_model(Block_Model_Spec(cluster_sizes=[2, 2], intra_corr=0.1, inter_corr=0.5))
        assert error.value.parameters["intra_corr"] == 0.1

    def test_not_positive_semi_definite(self):
        with pytest.raises(Problem_Construction_Error, match="positive semi-definite"):
            build_block_model(Block_Model_Spec(cluster_sizes=[1, 1, 1], intra_corr=0.5, inter_corr=-0.9))

    def test_construction_error_is_value_error(self):
        with pytest.raises(ValueError):
            build_block_model(Block_Model_Spec(cluster_sizes=[], intra_corr=0.5, inter_corr=0.1))

    def test_document_rebuilds_problem(self, tmp_path):
        spec = build_block_model(Block_Model_Spec(cluster_sizes=[2, 2], intra_corr=0.5, inter_corr=0.1))
        spec.to_json(tmp_path / "problem.json")
        rebuilt = Problem_Spec.from_json(tmp_path / "problem.json")
        assert_allclose(rebuilt.sigma, spec.sigma)
        assert_array_equal(rebuilt.partition, spec.partition)


class TestFreeWilson:

    @pytest.fixture
    def small_spec(self) -> Free_Wilson_Spec:
        return Free_Wilson_Spec(sites=[("A", 2), ("B", 3)], atom_means=[[0.0, 1.0], [0.0, 0.5, 1.0]],
                                atom_vars=[[0.4, 0.4], [0.1, 0.1, 0.1]], noise_var=0.01)

    def test_means_are_additive(self, small_spec):
        spec = build_free_wilson(small_spec)
        assert spec.p == 6
        assert_allclose(spec.mu, [0.0, 0.5, 1.0, 1.0, 1.5, 2.0])
        assert spec.best_index == 5

    def test_covariance_from_shared_substituents(self, small_spec):
        spec = build_free_wilson(small_spec)
        sigma = spec.sigma
        assert spec.is_factor_model
        assert_allclose(np.diag(sigma), 0.51)
        assert sigma[0, 1] == pytest.approx(0.4)
        assert sigma[0, 3] == pytest.approx(0.1)
        assert sigma[0, 4] == pytest.approx(0.0)

    def test_clusters_follow_dominant_site(self, small_spec):
        spec = build_free_wilson(small_spec)
        assert_array_equal(spec.partition, [0, 0, 0, 1, 1, 1])

    def test_eigenvalue_range_of_factor_model(self, small_spec):
        spec = build_free_wilson(small_spec)
        low, high = spec.eigenvalue_range
        dense = np.linalg.eigvalsh(spec.sigma)
        assert low == pytest.approx(dense[0], abs=1e-10)
        assert high == pytest.approx(dense[-1], rel=1e-10)

    def test_subset(self, small_spec):
        spec = build_free_wilson(small_spec, (3, 6))
        assert spec.p == 3
        assert_allclose(spec.mu, [1.0, 1.5, 2.0])

    def test_nonpositive_atom_variance(self, small_spec):
        broken = small_spec.model_copy(update={"atom_vars": [[0.4, 0.0], [0.1, 0.1, 0.1]]})
        with pytest.raises(Problem_Construction_Error):
            build_free_wilson(broken)

    def test_desk_instance(self):
        spec = build_free_wilson(desk_free_wilson_spec(32, seed=1))
        assert spec.p == 32
        assert spec.k == 8

    def test_desk_size_must_be_eight_squares(self):
        with pytest.raises(ValueError):
            desk_free_wilson_spec(30)


class TestFixtures:

    def test_fixture_covariance(self):
        covariance = fixture_covariance(0.05, 0.02)
        assert_allclose(np.diag(covariance), 0.1)
        assert covariance[0, 3] == pytest.approx(0.05)
        assert covariance[4, 2] == pytest.approx(0.02)
        assert covariance[1, 2] == pytest.approx(0.01)

    def test_grid_skips_indefinite_cell(self):
        settings = correlation_grid_settings()
        assert len(settings) == 15
        assert all(s.label != f"x={NOT_POSITIVE_DEFINITE_CELL[0]},y={NOT_POSITIVE_DEFINITE_CELL[1]}" for s in settings)
        assert len(CORRELATION_GRID_REFERENCE) == len(settings)

    def test_sample_size_labels(self):
        labels = [s.label for s in sample_size_settings()]
        assert labels == ["high,N1=5"] + [f"low,N1={n}" for n in range(5, 11)]
        assert set(FIXTURES) == {"table1", "table2"}
        assert resolve_fixture("sample-size") == "table2"
        assert resolve_fixture("table1") == "table1"
        with pytest.raises(KeyError):
            resolve_fixture("table3")


class TestSimulation:

    def test_derive_seed_is_deterministic(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(1, 3)
        assert derive_seed(1, 2) != derive_seed(2, 2)
        assert 0 <= derive_seed(12345, 678) < 2 ** 64

    def test_factor_reproduces_matrix(self):
        matrix = fixture_covariance(0.02, 0.02)
        factor = symmetric_factor(matrix)
        assert_allclose(factor @ factor.T, matrix, atol=1e-12)

    def test_factor_of_singular_matrix(self):
        factor = symmetric_factor(np.ones((3, 3)))
        assert_allclose(factor @ factor.T, np.ones((3, 3)), atol=1e-6)

    def test_factor_of_indefinite_matrix(self):
        with pytest.raises(Factorization_Error):
            symmetric_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_simulate_shape_and_determinism(self, independent_three):
        first = simulate(independent_three, 50, seed=3)
        assert first.shape == (50, 3)
        assert_array_equal(first, simulate(independent_three, 50, seed=3))
        with pytest.raises(ValueError):
            simulate(independent_three, 0, seed=3)

    def test_stream_is_deterministic(self, easy_block):
        first = Replication_Stream(easy_block, None, seed=9).full_rows(0, 20)
        second = Replication_Stream(easy_block, None, seed=9).full_rows(0, 20)
        assert_array_equal(first, second)

    def test_single_alternative_matches_full_rows(self, easy_block):
        stream = Replication_Stream(easy_block, None, seed=9)
        rows = stream.full_rows(0, 30)
        assert_allclose(stream.observations(4, 0, 30), rows[:, 4], atol=1e-12)
        assert_allclose(stream.observations(2, 10, 5), rows[10:15, 2], atol=1e-12)

    def test_rows_across_blocks(self, easy_block):
        stream = Replication_Stream(easy_block, None, seed=9, block_rows=16)
        rows = stream.full_rows(0, 40)
        assert_allclose(stream.full_rows(10, 20, replay=True), rows[10:30], atol=1e-12)

    def test_sample_accounting(self, easy_block):
        stream = Replication_Stream(easy_block, None, seed=9)
        stream.full_rows(0, 5)
        stream.observations(0, 5, 7)
        stream.full_rows(0, 5, replay=True)
        assert stream.samples_drawn == 5 * 9 + 7

    def test_scoped_stream(self, easy_block):
        stream = Replication_Stream(easy_block, [0, 3, 6], seed=9)
        assert stream.p == 3
        assert stream.full_rows(0, 4).shape == (4, 3)

    def test_block_cache_is_bounded(self, easy_block):
        stream = Replication_Stream(easy_block, None, seed=9, block_rows=8, cached_blocks=2)
        rows = stream.full_rows(0, 80)
        assert stream.cached_block_ids == [8, 9]
        assert_allclose(stream.full_rows(0, 16, replay=True), rows[:16], atol=1e-12)
        assert stream.cached_block_ids == [0, 1]
        assert_allclose(stream.observations(3, 70, 10), rows[70:, 3], atol=1e-12)

    def test_export_observations(self, easy_block, tmp_path):
        observations = simulate(easy_block, 6, seed=2, indices=[0, 3, 6])
        path = tmp_path / "observations.csv"
        export_observations_csv(observations, path, [0, 3, 6])
        assert path.read_text().splitlines()[0] == "0,3,6"
        loaded = pd.read_csv(path)
        assert list(loaded.columns) == ["0", "3", "6"]
        assert_allclose(loaded.to_numpy(), observations)
