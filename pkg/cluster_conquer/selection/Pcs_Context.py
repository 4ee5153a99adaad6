"""Plug-in quantities behind the individual probability of correct selection of a candidate"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from cluster_conquer.exceptions import Degenerate_Context_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec

DEGENERATE_TOLERANCE = 1e-12


def mean_covariance(covariance: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :return: covariance of the sample means, cov(X_i, X_j) / max(N_i, N_j)
    """
    counts = np.asarray(counts, dtype=float)
    return np.asarray(covariance, dtype=float) / np.maximum.outer(counts, counts)


@dataclass(frozen=True)
class Pcs_Parameters:
    """
        Means, observation covariance and sample sizes that determine the joint law of the sample means
    """
    means: np.ndarray
    covariance: np.ndarray
    counts: np.ndarray

    @property
    def p(self) -> int:
        """
        :return: number of alternatives
        """
        return len(self.means)

    @property
    def mean_covariance(self) -> np.ndarray:
        """
        :return: covariance of the sample means
        """
        return mean_covariance(self.covariance, self.counts)

    @staticmethod
    def from_problem(problem: Problem_Spec, counts) -> "Pcs_Parameters":
        """
        :param problem: ground truth
        :param counts: sample size of each alternative
        :return: the true parameters at those sample sizes
        """
        return Pcs_Parameters(np.array(problem.mu), problem.sigma, np.asarray(counts))


class Pcs_Context:
    """
        lambda_i = var(xbar_tau - xbar_i), d_i = (mu_tau - mu_i) / sqrt(lambda_i), the correlations of the differences and the index sets above and below tau
    """

    def __init__(self, tau: int, means: np.ndarray, covariance: np.ndarray, counts: np.ndarray):
        means = np.asarray(means, dtype=float)
        counts = np.asarray(counts)
        if counts.min() < 1:
            raise ValueError("every alternative needs at least one sample")
        assert covariance.shape == (means.size, means.size), f"covariance shape {covariance.shape} does not match {means.size} means"
        self.tau: int = tau
        self.means: np.ndarray = means
        p = means.size
        self.competitors: np.ndarray = np.delete(np.arange(p), tau)
        mean_cov = mean_covariance(covariance, counts)
        diagonal = np.diag(mean_cov)
        lambdas = diagonal[tau] + diagonal - 2.0 * mean_cov[tau]
        for i in self.competitors:
            if lambdas[i] <= DEGENERATE_TOLERANCE * (diagonal[tau] + diagonal[i]):
                raise Degenerate_Context_Error(tau, int(i), float(lambdas[i]))
        lambdas[tau] = np.nan
        self.lambdas: np.ndarray = lambdas
        self.d: np.ndarray = (means[tau] - means) / np.sqrt(lambdas)
        others = self.competitors
        difference_cov = (mean_cov[tau, tau] - mean_cov[tau, others][None, :] - mean_cov[others, tau][:, None]
                          + mean_cov[np.ix_(others, others)])
        scale = np.sqrt(lambdas[others])
        self.r_tilde: np.ndarray = np.clip(difference_cov / np.outer(scale, scale), -1.0, 1.0)
        self.upper: List[int] = [int(i) for i in others if means[i] > means[tau]]
        self.lower: List[int] = [int(i) for i in others if means[i] < means[tau]]
        self.ties: List[int] = [int(i) for i in others if means[i] == means[tau]]

    @property
    def competitor_d(self) -> np.ndarray:
        """
        :return: d_i for every i other than tau, in index order
        """
        return self.d[self.competitors]

    def r_tilde_within(self, low: float, high: Optional[float] = None) -> bool:
        """
        :param low: smallest allowed off-diagonal correlation of differences
        :param high: largest allowed, 1 when None
        :return: True if every off-diagonal entry of r_tilde lies in [low, high]
        """
        if self.r_tilde.shape[0] < 2:
            return True
        off_diagonal = self.r_tilde[~np.eye(self.r_tilde.shape[0], dtype=bool)]
        return bool(off_diagonal.min() >= low and off_diagonal.max() <= (1.0 if high is None else high))


def build_context(tau: int, means: np.ndarray, covariance: np.ndarray, counts: np.ndarray) -> Pcs_Context:
    """
    :param tau: candidate index
    :param means: mean of each alternative
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :return: the context of tau
    """
    return Pcs_Context(tau, means, covariance, counts)
