"""Linkage clustering of alternatives by correlation and first-principal-component prototypes"""
import logging
from typing import Optional

import numpy as np
from networkx.utils import UnionFind

from cluster_conquer.clustering.Cluster_Partition import Cluster_Partition, Provenance
from cluster_conquer.exceptions import Clustering_Error, Convergence_Error

logger = logging.getLogger(__name__)

POWER_TOLERANCE = 1e-10
POWER_ITERATION_CAP = 10_000
_LOADING_TIE = 1e-9


def ac_cluster(correlation: np.ndarray, k: int, size_cap: Optional[int] = None) -> Cluster_Partition:
    """
    Agglomerates groups by their most correlated pair of members until k groups remain.
    Pairs are visited by descending correlation, then ascending index; with a size cap, merges that would exceed it are skipped
    :param correlation: p x p correlation matrix
    :param k: number of groups
    :param size_cap: largest allowed group
    :return: partition labeled by order of each group's smallest member
    """
    correlation = np.asarray(correlation, dtype=float)
    p = correlation.shape[0]
    if not 1 <= k <= p:
        raise Clustering_Error(f"cannot form {k} groups from {p} alternatives")
    if size_cap is not None and k * size_cap < p:
        raise Clustering_Error(f"{k} groups of at most {size_cap} cannot hold {p} alternatives")
    rows, columns = np.triu_indices(p, 1)
    order = np.lexsort((columns, rows, -correlation[rows, columns]))
    groups = UnionFind(range(p))
    group_count = p
    for edge in order:
        if group_count == k:
            break
        i, j = int(rows[edge]), int(columns[edge])
        root_i, root_j = groups[i], groups[j]
        if root_i == root_j:
            continue
        if size_cap is not None and groups.weights[root_i] + groups.weights[root_j] > size_cap:
            continue
        groups.union(i, j)
        group_count -= 1
    if group_count > k:
        raise Clustering_Error(f"merges exhausted with {group_count} groups left, {k} requested")
    labels = np.empty(p, dtype=int)
    root_labels = {}
    for i in range(p):
        labels[i] = root_labels.setdefault(groups[i], len(root_labels))
    return Cluster_Partition(labels, provenance=Provenance.Linkage)


def select_prototype(correlation: np.ndarray) -> int:
    """
    Power iteration for the first principal component, sign fixed so its entries sum to a nonnegative value
    :param correlation: correlation submatrix of one cluster
    :return: local index of the largest loading, lowest index on ties
    """
    correlation = np.atleast_2d(np.asarray(correlation, dtype=float))
    m = correlation.shape[0]
    if m == 1:
        return 0
    vector = np.full(m, 1.0 / np.sqrt(m))
    eigenvalue = float(vector @ correlation @ vector)
    for _ in range(POWER_ITERATION_CAP):
        product = correlation @ vector
        norm = np.linalg.norm(product)
        if norm == 0:
            raise Convergence_Error("power iteration reached the zero vector")
        vector = product / norm
        updated = float(vector @ correlation @ vector)
        if abs(updated - eigenvalue) <= POWER_TOLERANCE * abs(updated):
            break
        eigenvalue = updated
    else:
        raise Convergence_Error(f"power iteration did not converge in {POWER_ITERATION_CAP} iterations")
    if vector.sum() < 0:
        vector = -vector
    top = vector.max()
    return int(np.flatnonzero(vector >= top - _LOADING_TIE * abs(top))[0])


def random_partition(p: int, k: int, seed: int) -> Cluster_Partition:
    """
    :param p: number of alternatives
    :param k: number of groups
    :param seed: generator seed
    :return: a uniformly random partition into groups whose sizes differ by at most one
    """
    if not 1 <= k <= p:
        raise Clustering_Error(f"cannot form {k} groups from {p} alternatives")
    rng = np.random.default_rng(seed)
    return Cluster_Partition(rng.permutation(np.arange(p) % k), provenance=Provenance.Random)
