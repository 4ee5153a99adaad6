"""Probability of correct clustering: lower bounds, required clustering samples and empirical measurement"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import norm

from cluster_conquer.clustering.Cluster_Partition import Cluster_Partition, match_labels
from cluster_conquer.clustering.Clustering_Config import Clustering_Config
from cluster_conquer.clustering.alternative_clustering import select_prototype
from cluster_conquer.clustering.few_shot_clustering import cluster_alternatives, prototype_support_members, split_support
from cluster_conquer.exceptions import Domain_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import derive_seed
from cluster_conquer.statistics.correlation_tests import meng_term, meng_variance

logger = logging.getLogger(__name__)

AC_BOUND_LIMIT = 200
_EDGE = 1.0 - 1e-12


class Comparison_Set(NamedTuple):
    """
        Correlations (r_ab, r_ac, r_bc) of comparisons z(r_ab) > z(r_ac), where a and b share a cluster and c does not
    """
    r_ab: np.ndarray
    r_ac: np.ndarray
    r_bc: np.ndarray

    @property
    def size(self) -> int:
        """
        :return: number of comparisons
        """
        return self.r_ab.size


@dataclass
class Pcc_Report:
    """
        Lower bound on the probability of correct clustering and its factors; raw values may leave [0, 1]
    """
    occupancy: float
    support_term: float
    query_term: float
    lower_bound_raw: float
    delta_c: float
    n: int
    support_comparisons: int
    query_comparisons: int
    empirical: Optional[float] = None
    ac_equal_bound: Optional[float] = None
    ac_unequal_bound: Optional[float] = None
    required_samples: Optional[int] = None

    @property
    def lower_bound(self) -> float:
        """
        :return: the bound clamped to [0, 1]
        """
        return float(min(max(self.lower_bound_raw, 0.0), 1.0))

    def to_dict(self) -> Dict:
        """
        :return: fields plus the clamped bound
        """
        return {**asdict(self), "lower_bound": self.lower_bound}


def occupancy_probability(k: int, p_s: int) -> float:
    """
    :param k: number of equal-size clusters
    :param p_s: support size
    :return: 1 - k (1 - 1/k)^p_s, the bound on every cluster being represented in the support
    """
    if k == 1:
        return 1.0
    return float(1.0 - k * (1.0 - 1.0 / k) ** p_s)


def _clipped(values: np.ndarray) -> np.ndarray:
    return np.clip(values, -_EDGE, _EDGE)


def support_comparisons(correlation: np.ndarray, labels: np.ndarray, support: Sequence[int]) -> Comparison_Set:
    """
    :param correlation: correlations of all alternatives
    :param labels: true labels of all alternatives
    :param support: support indices
    :return: comparisons over ordered pairs a != b in one cluster and c elsewhere, all in the support
    """
    support = np.asarray(support, dtype=int)
    a, b, c = np.meshgrid(support, support, support, indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    keep = (a != b) & (labels[a] == labels[b]) & (labels[a] != labels[c])
    a, b, c = a[keep], b[keep], c[keep]
    return Comparison_Set(_clipped(correlation[a, b]), _clipped(correlation[a, c]), _clipped(correlation[b, c]))


def query_comparisons(correlation: np.ndarray, labels: np.ndarray, query: Sequence[int], prototypes: Dict[int, int]) -> Comparison_Set:
    """
    :param correlation: correlations of all alternatives
    :param labels: true labels of all alternatives
    :param query: query indices
    :param prototypes: prototype of every cluster represented in the support
    :return: comparisons of a query alternative's own prototype against every other prototype
    """
    a_list, b_list, c_list = [], [], []
    for a in np.asarray(query, dtype=int):
        own = prototypes.get(int(labels[a]))
        if own is None:
            continue
        for label, other in prototypes.items():
            if label != labels[a]:
                a_list.append(a)
                b_list.append(own)
                c_list.append(other)
    a, b, c = np.array(a_list, dtype=int), np.array(b_list, dtype=int), np.array(c_list, dtype=int)
    return Comparison_Set(_clipped(correlation[a, b]), _clipped(correlation[a, c]), _clipped(correlation[b, c]))


def bonferroni_comparison_term(comparisons: Comparison_Set, delta_c: float, n: int) -> float:
    """
    :param comparisons: the comparison set
    :param delta_c: Fisher-z gap
    :param n: replications behind the estimates
    :return: sum of Phi(delta_c / sd) - (|set| - 1), 1 for an empty set
    """
    if comparisons.size == 0:
        return 1.0
    variance = meng_variance(comparisons.r_ab, comparisons.r_ac, comparisons.r_bc, n)
    return float(norm.cdf(delta_c / np.sqrt(variance)).sum() - (comparisons.size - 1))


def true_prototypes(correlation: np.ndarray, truth: Cluster_Partition, support: Sequence[int]) -> Dict[int, int]:
    """
    :return: first-principal-component prototype of each true cluster among its support members
    """
    prototypes = {}
    for label, members in prototype_support_members(truth, support).items():
        prototypes[label] = int(members[select_prototype(correlation[np.ix_(members, members)])])
    return prototypes


def pcc_lower_bound(correlation: np.ndarray, truth: Cluster_Partition, delta_c: float, n: int, support: Sequence[int],
                    prototypes: Optional[Dict[int, int]] = None, alpha_q: Optional[float] = None) -> Pcc_Report:
    """
    Occupancy factor times the support and query Bonferroni terms, with the linkage clustering bounds alongside when p allows them
    :param correlation: estimated correlations of all alternatives
    :param truth: true partition
    :param delta_c: Fisher-z gap
    :param n: replications behind the estimates
    :param support: support indices
    :param prototypes: prototype per true cluster, chosen from the support when None
    :param alpha_q: query error target for the required clustering samples, skipped when None or outside (0, query comparisons)
    :return: the report
    """
    if n <= 3:
        raise Domain_Error(f"n must exceed 3, got {n}")
    if delta_c <= 0:
        raise ValueError("delta_c must be positive")
    support = np.asarray(support, dtype=int)
    query = np.setdiff1d(np.arange(truth.p), support)
    prototypes = true_prototypes(correlation, truth, support) if prototypes is None else prototypes
    gamma_s = support_comparisons(correlation, truth.labels, support)
    gamma_q = query_comparisons(correlation, truth.labels, query, prototypes)
    occupancy = occupancy_probability(truth.k, support.size)
    support_term = bonferroni_comparison_term(gamma_s, delta_c, n)
    query_term = bonferroni_comparison_term(gamma_q, delta_c, n)
    report = Pcc_Report(occupancy, support_term, query_term, occupancy * support_term * query_term, delta_c, n, gamma_s.size, gamma_q.size)
    if truth.p <= AC_BOUND_LIMIT:
        ac_bounds = pcc_ac_lower_bound(correlation, truth, delta_c, n)
        report.ac_equal_bound, report.ac_unequal_bound = ac_bounds["equal_size"], ac_bounds["unequal_size"]
    if alpha_q is not None and 0 < alpha_q < gamma_q.size:
        report.required_samples = required_clustering_samples(alpha_q, delta_c, gamma_q, n)
    return report


def independent_comparison_count(sizes: Iterable[int]) -> int:
    """
    :param sizes: cluster sizes
    :return: number of (intra pair, inter pair) comparisons sharing no alternative and no cluster
    """
    sizes = np.asarray(list(sizes), dtype=np.int64)
    total = 0
    for g, size in enumerate(sizes):
        rest = np.delete(sizes, g)
        inter_pairs = (rest.sum() ** 2 - (rest ** 2).sum()) // 2
        total += size * (size - 1) // 2 * inter_pairs
    return int(total)


def pcc_ac_lower_bound(correlation: np.ndarray, truth: Cluster_Partition, delta_c: float, n: int) -> Dict[str, float]:
    """
    Bounds for linkage clustering over all alternatives
    :return: "equal_size" over comparisons sharing an alternative, "unequal_size" adding the independent comparisons
    """
    if truth.p > AC_BOUND_LIMIT:
        raise ValueError(f"linkage clustering bound enumerates O(p^3) comparisons; p = {truth.p} exceeds {AC_BOUND_LIMIT}")
    if n <= 3:
        raise Domain_Error(f"n must exceed 3, got {n}")
    shared = bonferroni_comparison_term(support_comparisons(correlation, truth.labels, np.arange(truth.p)), delta_c, n)
    independent = 1.0 - independent_comparison_count(truth.sizes) * (1.0 - norm.cdf(delta_c / np.sqrt(2.0 / (n - 3))))
    return {"equal_size": shared, "unequal_size": shared + independent - 1.0}


def required_clustering_samples(alpha_q: float, delta_c: float, comparisons: Comparison_Set, n0: int) -> int:
    """
    :param alpha_q: target, 0 < alpha_q < |comparisons|
    :param delta_c: Fisher-z gap
    :param comparisons: query comparisons with pilot correlations
    :param n0: pilot sample size
    :return: additional replications, max(0, floor(2 z^2 / delta_c^2 * max (1 - r_bc) h + 3 - n0))
    """
    size = comparisons.size
    if not 0 < alpha_q < size:
        raise Domain_Error(f"alpha_q must lie in (0, {size}), got {alpha_q}")
    if delta_c <= 0:
        raise ValueError("delta_c must be positive")
    z = norm.ppf((size - alpha_q) / size)
    worst = float(np.max(meng_term(comparisons.r_ab, comparisons.r_bc)))
    return int(max(0, np.floor(2.0 * z * z / delta_c ** 2 * worst + 3 - n0)))


class Pcc_Measurement(NamedTuple):
    """
        Empirical probability of correct clustering over macro replications
    """
    pcc: float
    standard_error: float
    ci_low: float
    ci_high: float
    mean_accuracy: float
    reps: int


def _one_clustering(spec: Problem_Spec, config: Clustering_Config, n: int, seed: int, truth: Cluster_Partition):
    match = match_labels(cluster_alternatives(spec, config, n, seed, n_jobs=1), truth)
    return match.exact, match.accuracy


def measure_pcc(spec: Problem_Spec, config: Clustering_Config, reps: int, seed: int, n: Optional[int] = None, n_jobs: int = 1) -> Pcc_Measurement:
    """
    :param spec: problem with its true partition
    :param config: clustering parameters
    :param reps: macro replications
    :param seed: root seed; replication r uses derive_seed(seed, r)
    :param n: replications behind the correlation estimates, config.n when None
    :param n_jobs: workers over replications
    :return: fraction of replications recovering the true partition up to relabeling, with a 95% interval
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    n = config.n if n is None else n
    truth = Cluster_Partition.from_problem(spec)
    outcomes = Parallel(n_jobs=n_jobs)(delayed(_one_clustering)(spec, config, n, derive_seed(seed, r), truth) for r in range(reps))
    exact = np.array([o[0] for o in outcomes], dtype=float)
    pcc = float(exact.mean())
    standard_error = float(np.sqrt(pcc * (1.0 - pcc) / reps))
    return Pcc_Measurement(pcc, standard_error, max(0.0, pcc - 1.96 * standard_error), min(1.0, pcc + 1.96 * standard_error),
                           float(np.mean([o[1] for o in outcomes])), reps)


def pcc_sweep(spec: Problem_Spec, config: Clustering_Config, n_values: Sequence[int], p_s_values: Sequence[int], reps: int, seed: int,
              delta_c: float, n_jobs: int = 1, alpha_q: float = 0.05) -> pd.DataFrame:
    """
    :return: one row per (n, p_s): empirical PCC and its standard error against the bounds from true correlations, the occupancy
        cap and the extra clustering samples for query error alpha_q; linkage bounds are NaN above AC_BOUND_LIMIT alternatives
    """
    truth = Cluster_Partition.from_problem(spec)
    correlation = spec.correlation()
    rows = []
    for p_s in p_s_values:
        support, _ = split_support(spec.p, p_s, derive_seed(seed, p_s))
        for n in n_values:
            sweep_config = config.model_copy(update={"p_s": p_s, "n": n})
            measurement = measure_pcc(spec, sweep_config, reps, derive_seed(seed, n), n_jobs=n_jobs)
            report = pcc_lower_bound(correlation, truth, delta_c, n, support, alpha_q=alpha_q)
            rows.append({"n": n, "p_s": p_s, "empirical_pcc": measurement.pcc, "standard_error": measurement.standard_error,
                         "lower_bound": report.lower_bound, "occupancy_cap": report.occupancy, "ac_equal_bound": report.ac_equal_bound,
                         "ac_unequal_bound": report.ac_unequal_bound, "required_samples": report.required_samples})
            logger.info(f"p_s={p_s} n={n}: PCC {measurement.pcc:.3f}, bound {report.lower_bound:.3f}")
    return pd.DataFrame(rows)
