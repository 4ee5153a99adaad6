"""Few-shot clustering: linkage clustering on a random support set, then parallel matching of the query alternatives to prototypes"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from cluster_conquer.clustering.Cluster_Partition import Cluster_Partition, Provenance
from cluster_conquer.clustering.Clustering_Config import Clustering_Config, Clustering_Method
from cluster_conquer.clustering.alternative_clustering import ac_cluster, random_partition, select_prototype
from cluster_conquer.exceptions import Clustering_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import derive_seed, simulate
from cluster_conquer.statistics.Covariance_Estimate import Covariance_Method
from cluster_conquer.statistics.Sample_Store import Sample_Store

logger = logging.getLogger(__name__)

_CHUNKS_PER_WORKER = 4


def _estimated_correlation(observations: np.ndarray, estimator: Covariance_Method) -> np.ndarray:
    return estimator(Sample_Store.from_observations(observations)).correlation()


def _pearson_with_last(observations: np.ndarray) -> np.ndarray:
    centered = observations - observations.mean(axis=0)
    scale = np.sqrt(np.maximum((centered ** 2).sum(axis=0), 1e-15))
    return (centered[:, :-1] * centered[:, -1:]).sum(axis=0) / (scale[:-1] * scale[-1])


def _match_chunk(spec: Problem_Spec, prototypes: List[int], chunk: np.ndarray, n: int, seed: int) -> np.ndarray:
    assignments = np.empty(chunk.size, dtype=int)
    for position, j in enumerate(chunk):
        paired = simulate(spec, n, derive_seed(seed, int(j)), prototypes + [int(j)])
        assignments[position] = int(np.argmax(_pearson_with_last(paired)))
    return assignments


def split_support(p: int, p_s: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    :param p: number of alternatives
    :param p_s: support size
    :param seed: generator seed
    :return: support and query indices, each ascending, drawn uniformly without replacement
    """
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(p, size=p_s, replace=False))
    return support, np.setdiff1d(np.arange(p), support)


def ac_plus(spec: Problem_Spec, n: int, k: int, p_s: int, p_q: Optional[int] = None, n_jobs: int = 1, seed: int = 0,
            estimator: Covariance_Method = Covariance_Method.Sample, oracle: bool = False,
            observations: Optional[np.ndarray] = None, size_cap: Optional[int] = None) -> Cluster_Partition:
    """
    :param spec: sample source
    :param n: replications behind every correlation estimate
    :param k: number of clusters
    :param p_s: support size
    :param p_q: query size, p - p_s when None
    :param n_jobs: workers for query matching
    :param seed: root seed; support split, support sampling and each query alternative get derived seeds
    :param estimator: covariance estimator for the support set
    :param oracle: use exact correlations instead of samples
    :param observations: full-vector replications to reuse instead of fresh draws (at least n rows)
    :param size_cap: largest support cluster
    :return: the partition with prototypes, support set and simulation cost
    """
    p = spec.p
    p_q = p - p_s if p_q is None else p_q
    if p_s + p_q != p:
        raise ValueError(f"p_s + p_q = {p_s + p_q} differs from p = {p}")
    if not 1 <= k <= p_s:
        raise Clustering_Error(f"k = {k} must lie in 1..p_s = {p_s}")
    support, query = split_support(p, p_s, derive_seed(seed, 0))
    cost = {"support": 0, "query": 0, "prototype_copies": 0}
    if oracle:
        support_correlation = spec.correlation(support)
    elif observations is not None:
        support_correlation = _estimated_correlation(observations[:n, support], estimator)
    else:
        support_correlation = _estimated_correlation(simulate(spec, n, derive_seed(seed, 1), support), estimator)
        cost["support"] = n * p_s
    support_partition = ac_cluster(support_correlation, k, size_cap)
    prototypes = []
    for label in range(k):
        members = support_partition.members(label)
        prototypes.append(int(support[members[select_prototype(support_correlation[np.ix_(members, members)])]]))
    labels = np.empty(p, dtype=int)
    labels[support] = support_partition.labels
    if query.size:
        labels[query] = _match_queries(spec, prototypes, query, n, n_jobs, derive_seed(seed, 2), oracle, observations)
        if not oracle and observations is None:
            cost["query"] = n * query.size
            cost["prototype_copies"] = n * k * query.size
    logger.info(f"few-shot clustering of {p} alternatives into {k} clusters with support {p_s}")
    return Cluster_Partition(labels, prototypes, Provenance.Few_Shot, cost, support)


def _match_queries(spec: Problem_Spec, prototypes: List[int], query: np.ndarray, n: int, n_jobs: int, seed: int,
                   oracle: bool, observations: Optional[np.ndarray]) -> np.ndarray:
    if oracle:
        return np.argmax(spec.correlation(prototypes + query.tolist())[len(prototypes):, :len(prototypes)], axis=1)
    if observations is not None:
        rows = observations[:n]
        centered = rows - rows.mean(axis=0)
        scale = np.sqrt(np.maximum((centered ** 2).sum(axis=0), 1e-15))
        correlation = (centered[:, query].T @ centered[:, prototypes]) / np.outer(scale[query], scale[prototypes])
        return np.argmax(correlation, axis=1)
    chunks = np.array_split(query, max(1, n_jobs * _CHUNKS_PER_WORKER))
    results = Parallel(n_jobs=n_jobs)(delayed(_match_chunk)(spec, prototypes, chunk, n, seed) for chunk in chunks if chunk.size)
    return np.concatenate(results)


def cluster_alternatives(spec: Problem_Spec, config: Clustering_Config, n: int, seed: int, n_jobs: int = 1,
                         observations: Optional[np.ndarray] = None) -> Cluster_Partition:
    """
    Runs the configured clustering method
    :param spec: sample source
    :param config: clustering parameters
    :param n: replications behind the correlation estimates
    :param seed: generator seed
    :param n_jobs: workers for query matching
    :param observations: full-vector replications to reuse when the config allows it
    :return: the partition
    """
    reuse = observations if config.reuse_samples else None
    if config.method is Clustering_Method.Random:
        return random_partition(spec.p, config.k, seed)
    estimator = Covariance_Method(config.estimator)
    if config.method is Clustering_Method.Linkage:
        cost: Dict[str, int] = {"support": 0}
        if config.oracle:
            correlation = spec.correlation()
        elif reuse is not None:
            correlation = _estimated_correlation(reuse[:n], estimator)
        else:
            correlation = _estimated_correlation(simulate(spec, n, seed), estimator)
            cost["support"] = n * spec.p
        partition = ac_cluster(correlation, config.k, config.size_cap)
        return Cluster_Partition(partition.labels, provenance=Provenance.Linkage, sample_cost=cost)
    p_s = spec.p if config.p_s is None else config.p_s
    return ac_plus(spec, n, config.k, p_s, config.p_q, n_jobs, seed, estimator, config.oracle, reuse, config.size_cap)


def same_cluster_peer_counts(assignment: Cluster_Partition, truth: Cluster_Partition) -> np.ndarray:
    """
    :param assignment: processor assignment of alternatives
    :param truth: true clusters
    :return: count of each true cluster's members on each processor
    """
    return assignment.contingency(truth)


def prototype_support_members(partition: Cluster_Partition, support: Sequence[int]) -> Dict[int, np.ndarray]:
    """
    :param partition: partition of all alternatives
    :param support: support indices
    :return: support members of every cluster that has any
    """
    support = np.asarray(support, dtype=int)
    result = {}
    for label in range(partition.k):
        members = support[partition.labels[support] == label]
        if members.size:
            result[label] = members
    return result
