"""Probabilistic optimal selection: the candidate with the largest individual PCS"""
from typing import Any, Dict, Optional

import numpy as np

from cluster_conquer.selection.pcs_functions import MIN_DRAWS, Pcs_Method


class Selection_Result:
    """
        PCS of every candidate, the selected candidate tau_star and the traditional comparison point
    """

    def __init__(self, pcs: np.ndarray, method: Pcs_Method, best_mean_index: int, standard_errors: Optional[np.ndarray] = None):
        self.pcs: np.ndarray = np.asarray(pcs, dtype=float)
        self.method: Pcs_Method = method
        self.best_mean_index: int = best_mean_index
        self.standard_errors: Optional[np.ndarray] = standard_errors
        self.tau_star: int = int(np.argmax(self.pcs))
        self.bound_raw: Optional[float] = float(self.pcs[self.tau_star]) if method is Pcs_Method.Bonferroni else None

    @property
    def mopcs(self) -> float:
        """
        :return: PCS of tau_star, raw when the method is a bound
        """
        return float(self.pcs[self.tau_star])

    @property
    def mopcs_clamped(self) -> float:
        """
        :return: mopcs restricted to [0, 1]
        """
        return float(min(max(self.mopcs, 0.0), 1.0))

    @property
    def pcs_trad(self) -> float:
        """
        :return: PCS of the alternative with the largest mean
        """
        return float(self.pcs[self.best_mean_index])

    @property
    def tau_star_is_best_mean(self) -> bool:
        """
        :return: True if tau_star has the largest mean
        """
        return self.tau_star == self.best_mean_index

    def to_dict(self) -> Dict[str, Any]:
        """
        :return: JSON-ready summary
        """
        return {"tau_star": self.tau_star, "mopcs": self.mopcs, "pcs_trad": self.pcs_trad, "method": self.method.value,
                "best_mean_index": self.best_mean_index, "pcs": self.pcs.tolist()}


def select_pos(means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, method: Pcs_Method = Pcs_Method.Bonferroni,
               draws: int = MIN_DRAWS, seed: int = 0, n_jobs: int = 1, gap_floor: Optional[float] = None) -> Selection_Result:
    """
    :param means: mean of each alternative
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :param method: PCS evaluation
    :param draws: Monte Carlo draws per candidate
    :param seed: root seed of the per-candidate seeds
    :param n_jobs: workers for the Monte Carlo sweep
    :param gap_floor: indifference-zone floor for the Bonferroni bound
    :return: the selection with lowest-index tie-break
    """
    means = np.asarray(means, dtype=float)
    if means.size < 2:
        raise ValueError("selection needs at least two alternatives")
    pcs, standard_errors = method(means, covariance, counts, draws=draws, seed=seed, n_jobs=n_jobs, gap_floor=gap_floor)
    return Selection_Result(pcs, method, int(np.argmax(means)), standard_errors)
