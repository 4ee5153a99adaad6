"""Library of individual PCS evaluations: Monte Carlo oracle and Bonferroni lower bounds"""
import logging
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm

from cluster_conquer.problems.simulation import derive_seed, symmetric_factor
from cluster_conquer.selection.Pcs_Context import DEGENERATE_TOLERANCE, build_context, mean_covariance

logger = logging.getLogger(__name__)

MIN_DRAWS = 10 ** 4
_CHUNK = 100_000


class Pcs_Estimate(NamedTuple):
    """
        Monte Carlo probability with its standard error
    """
    value: float
    standard_error: float


class Bonferroni_Bound(NamedTuple):
    """
        Raw bound used for stopping decisions and its value clamped to [0, 1] for reporting
    """
    raw: float
    clamped: float


def _clamp(value: float) -> float:
    return float(min(max(value, 0.0), 1.0))


def strict_wins(sample_means: np.ndarray, tau: int) -> np.ndarray:
    """
    :param sample_means: draws x p matrix of sample-mean vectors
    :param tau: candidate
    :return: boolean per draw, True if tau is strictly maximal
    """
    others = np.delete(sample_means, tau, axis=1)
    if others.shape[1] == 0:
        return np.ones(sample_means.shape[0], dtype=bool)
    return sample_means[:, tau] > others.max(axis=1)


def pcs_monte_carlo(tau: int, means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, draws: int = MIN_DRAWS, seed: int = 0) -> Pcs_Estimate:
    """
    :param tau: candidate
    :param means: mean of each alternative
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :param draws: Monte Carlo draws, at least 10^4
    :param seed: generator seed
    :return: fraction of draws where the sample mean of tau is strictly maximal
    """
    if draws < MIN_DRAWS:
        raise ValueError(f"draws must be at least {MIN_DRAWS}, got {draws}")
    means = np.asarray(means, dtype=float)
    factor = symmetric_factor(mean_covariance(covariance, counts))
    rng = np.random.default_rng(seed)
    wins = 0
    for start in range(0, draws, _CHUNK):
        size = min(_CHUNK, draws - start)
        sample_means = means + rng.standard_normal((size, factor.shape[1])) @ factor.T
        wins += int(strict_wins(sample_means, tau).sum())
    estimate = wins / draws
    return Pcs_Estimate(estimate, float(np.sqrt(estimate * (1.0 - estimate) / draws)))


def monte_carlo_sweep(means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, draws: int = MIN_DRAWS, seed: int = 0, n_jobs: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluates every candidate with its own seed derived from its index
    :return: PCS estimates and their standard errors, in index order
    """
    p = len(means)
    estimates = Parallel(n_jobs=n_jobs)(delayed(pcs_monte_carlo)(tau, means, covariance, counts, draws, derive_seed(seed, tau)) for tau in range(p))
    return np.array([e.value for e in estimates]), np.array([e.standard_error for e in estimates])


def _floored_gaps(means: np.ndarray, gap_floor: Optional[float]) -> np.ndarray:
    gaps = means[:, None] - means[None, :]
    if gap_floor is not None:
        gaps = np.where(gaps > 0, np.maximum(gaps, gap_floor), gaps)
    return gaps


def bonferroni_sweep(means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, gap_floor: Optional[float] = None) -> np.ndarray:
    """
    Raw Bonferroni bound of every candidate. Pairs with vanishing difference variance take the limit of Phi(d): 1, 1/2 or 0 by the sign of the gap
    :param means: mean of each alternative
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :param gap_floor: indifference-zone floor applied to positive mean gaps
    :return: sum over i != tau of Phi(d_i) - (p - 2), per tau
    """
    means = np.asarray(means, dtype=float)
    p = means.size
    mean_cov = mean_covariance(covariance, counts)
    diagonal = np.diag(mean_cov)
    lambdas = diagonal[:, None] + diagonal[None, :] - 2.0 * mean_cov
    gaps = _floored_gaps(means, gap_floor)
    degenerate = lambdas <= DEGENERATE_TOLERANCE * (diagonal[:, None] + diagonal[None, :])
    np.fill_diagonal(degenerate, False)
    if degenerate.any():
        logger.debug(f"{int(degenerate.sum()) // 2} alternative pairs have degenerate difference variance")
    with np.errstate(divide="ignore", invalid="ignore"):
        d = gaps / np.sqrt(np.where(degenerate, 1.0, lambdas))
    phi = np.where(degenerate, 0.5 * (1.0 + np.sign(gaps)), norm.cdf(d))
    np.fill_diagonal(phi, 0.0)
    return phi.sum(axis=1) - (p - 2)


def mopcs_bonferroni(means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, tau: int, gap_floor: Optional[float] = None) -> Bonferroni_Bound:
    """
    :param means: mean of each alternative
    :param covariance: covariance of single observations
    :param counts: sample size of each alternative
    :param tau: candidate
    :param gap_floor: indifference-zone floor applied to positive mean gaps
    :return: sum over i != tau of Phi(d_i) - (p - 2)
    """
    context = build_context(tau, means, covariance, counts)
    gaps = _floored_gaps(np.asarray(means, dtype=float), gap_floor)[tau, context.competitors]
    raw = float(norm.cdf(gaps / np.sqrt(context.lambdas[context.competitors])).sum() - (len(means) - 2))
    return Bonferroni_Bound(raw, _clamp(raw))


def mopcs_bonferroni_min(means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, tau: int) -> Bonferroni_Bound:
    """
    :return: the looser bound (p - 1) min Phi(d_i) - (p - 2)
    """
    context = build_context(tau, means, covariance, counts)
    p = len(means)
    raw = float((p - 1) * norm.cdf(context.competitor_d).min() - (p - 2))
    return Bonferroni_Bound(raw, _clamp(raw))


class Pcs_Method(Enum):
    """
        How individual PCS is evaluated; calling a member returns PCS values and standard errors of every candidate
    """
    Bonferroni = "bonferroni"
    Monte_Carlo = "monte_carlo"

    def __call__(self, means: np.ndarray, covariance: np.ndarray, counts: np.ndarray, draws: int = MIN_DRAWS, seed: int = 0,
                 n_jobs: int = 1, gap_floor: Optional[float] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        if self is Pcs_Method.Bonferroni:
            return bonferroni_sweep(means, covariance, counts, gap_floor), None
        return monte_carlo_sweep(means, covariance, counts, draws, seed, n_jobs)
