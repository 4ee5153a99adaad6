"""Shared problems and configurations"""
import numpy as np
import pytest

from cluster_conquer.clustering.Clustering_Config import Clustering_Config, Clustering_Method
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.problem_builders import Block_Model_Spec, build_block_model
from cluster_conquer.procedures.Conquer_Config import Conquer_Config

EASY_BLOCK = Block_Model_Spec(cluster_sizes=[3, 3, 3], intra_corr=0.6, inter_corr=0.1, best_mean=4.0, local_best_mean=2.0)


@pytest.fixture
def easy_block() -> Problem_Spec:
    """Three clusters of three; every local best and the overall best are separated by many standard errors"""
    return build_block_model(EASY_BLOCK)


@pytest.fixture
def oracle_config() -> Conquer_Config:
    """Linkage clustering on exact correlations so the partition is the true one; the cap bounds runs over tied means"""
    return Conquer_Config(clustering=Clustering_Config(method=Clustering_Method.Linkage, k=3, oracle=True), seed=5,
                          cap_per_alternative=200)


@pytest.fixture
def independent_three() -> Problem_Spec:
    return Problem_Spec([1.0, 0.0, 0.0], [0, 0, 0], sigma=np.eye(3))
