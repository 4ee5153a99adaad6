"""Batch allocation policies: equal allocation, correlated budget allocation and the generalized step that switches between them"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from cluster_conquer.allocation.Allocation_Plan import Allocation_Case, Allocation_Plan, largest_remainder_round
from cluster_conquer.exceptions import Allocation_Error
from cluster_conquer.selection.Selection_Result import Selection_Result, select_pos
from cluster_conquer.selection.pcs_functions import MIN_DRAWS, Pcs_Method
from cluster_conquer.statistics.Sample_Store import Sample_Store

logger = logging.getLogger(__name__)

GAP_FLOOR = 1e-9
GRID_POINTS = 512
GRID_SPAN = 1e6
DEFAULT_EPSILON = 0.01


def equal_allocation(p: int, batch_size: int) -> Allocation_Plan:
    """
    :param p: number of alternatives
    :param batch_size: samples to allocate
    :return: counts differing by at most one, the remainder going to the lowest indices
    """
    if batch_size < 0:
        raise ValueError(f"batch size must be nonnegative, got {batch_size}")
    counts = np.full(p, batch_size // p, dtype=np.int64)
    counts[:batch_size % p] += 1
    return Allocation_Plan(counts, batch_size, Allocation_Case.Equal)


@dataclass
class Cba_Inputs:
    """
        Candidate tau with its competitor set omega; means, variances and covariances with tau are indexed over the whole scope
    """
    tau: int
    omega: Sequence[int]
    means: np.ndarray
    variances: np.ndarray
    covariances: np.ndarray
    batch_size: int

    @staticmethod
    def from_covariance(tau: int, omega: Sequence[int], means: np.ndarray, covariance: np.ndarray, batch_size: int) -> "Cba_Inputs":
        """
        :param covariance: covariance of single observations over the scope
        :return: inputs reading variances from the diagonal and covariances from row tau
        """
        covariance = np.asarray(covariance, dtype=float)
        return Cba_Inputs(tau, list(omega), np.asarray(means, dtype=float), np.diag(covariance).copy(), covariance[tau].copy(), batch_size)

    @property
    def p(self) -> int:
        """
        :return: number of alternatives in the scope
        """
        return len(self.means)


class _Cba_Terms(NamedTuple):
    omega: np.ndarray
    variances: np.ndarray
    twice_cov: np.ndarray
    excess: np.ndarray
    squared_gaps: np.ndarray
    tau_variance: float
    batch_size: int


def _second_set(terms: _Cba_Terms, x: float) -> np.ndarray:
    return (terms.excess > 0) & ((terms.tau_variance + terms.excess) / terms.squared_gaps > x * terms.batch_size)


def _ratios(terms: _Cba_Terms, x: float) -> np.ndarray:
    """N_i / N_tau for every competitor"""
    scaled_gaps = x * terms.batch_size * terms.squared_gaps
    second = _second_set(terms, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        first_ratio = terms.variances / (terms.twice_cov - terms.tau_variance + scaled_gaps)
        second_ratio = terms.excess / (scaled_gaps - terms.tau_variance)
    return np.where(second, second_ratio, first_ratio)


def _objective(terms: _Cba_Terms, x: float) -> float:
    ratios = _ratios(terms, x)
    if not np.all(np.isfinite(ratios)) or (ratios < 0).any():
        return np.inf
    return float(x * (ratios.sum() + 1.0))


def _minimize_objective(terms: _Cba_Terms, x_low: float) -> float:
    grid = np.geomspace(x_low, GRID_SPAN * x_low, GRID_POINTS)
    values = np.array([_objective(terms, x) for x in grid])
    if not np.isfinite(values).any():
        raise Allocation_Error(f"no feasible x in [{x_low:.3e}, {GRID_SPAN * x_low:.3e}]")
    best = int(np.argmin(values))
    low, high = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    if high > low:
        refined = minimize_scalar(lambda x: _objective(terms, x), bounds=(low, high), method="bounded", options={"xatol": low * 1e-9})
        if refined.success and refined.fun <= values[best]:
            return float(refined.x)
    return float(grid[best])


def cba_allocate(inputs: Cba_Inputs) -> Allocation_Plan:
    """
    Correlated budget allocation of one batch between tau and its competitors.
    Mean gaps below 1e-9 (1 + |mu_tau|) are floored to that value
    :param inputs: candidate, competitors and plug-in statistics
    :return: plan over the scope; alternatives outside tau and omega get nothing
    """
    tau, batch_size = inputs.tau, inputs.batch_size
    omega = np.asarray([i for i in inputs.omega if i != tau], dtype=int)
    fractional = np.zeros(inputs.p)
    if batch_size == 0:
        return Allocation_Plan(np.zeros(inputs.p, dtype=np.int64), 0, Allocation_Case.A, fractional=fractional, tau=tau)
    if omega.size == 0:
        fractional[tau] = batch_size
        return Allocation_Plan(largest_remainder_round(fractional, batch_size), batch_size, Allocation_Case.A, fractional=fractional, tau=tau)
    mean_tau = float(inputs.means[tau])
    gaps = np.abs(mean_tau - inputs.means[omega])
    gaps = np.maximum(gaps, GAP_FLOOR * (1.0 + abs(mean_tau)))
    variances = inputs.variances[omega]
    twice_cov = 2.0 * inputs.covariances[omega]
    terms = _Cba_Terms(omega, variances, twice_cov, variances - twice_cov, gaps ** 2, float(inputs.variances[tau]), batch_size)
    positive = terms.excess > 0
    m_one = float(np.max(terms.tau_variance / (batch_size * terms.squared_gaps[positive]), initial=0.0))
    m_two = float(np.max((terms.tau_variance + terms.excess[~positive]) / (batch_size * terms.squared_gaps[~positive]), initial=0.0))
    x_low = max(m_one, m_two)
    if x_low <= 0:
        x_low = 1e-12 / batch_size
    x_zero = _minimize_objective(terms, x_low)
    ratios = _ratios(terms, x_zero)
    negative = np.flatnonzero(~np.isfinite(ratios) | (ratios < 0))
    if negative.size:
        raise Allocation_Error("negative allocation denominator", int(omega[negative[0]]))
    tau_share = batch_size / (ratios.sum() + 1.0)
    fractional[tau] = tau_share
    fractional[omega] = ratios * tau_share
    return Allocation_Plan(largest_remainder_round(fractional, batch_size), batch_size, Allocation_Case.A, fractional=fractional, tau=tau)


def epsilon_floor(epsilon: float, batch_size: int) -> int:
    """
    :return: ceil(epsilon * batch_size) with a 1e-9 tolerance against round-off
    """
    return int(math.ceil(epsilon * batch_size - 1e-9)) if epsilon > 0 else 0


def gba_allocate(tau: int, means: np.ndarray, covariance: np.ndarray, above: Sequence[int], batch_size: int,
                 epsilon: float = DEFAULT_EPSILON) -> Allocation_Plan:
    """
    Case (a) when no alternative has a larger mean than tau: correlated allocation over every other alternative.
    Case (b) otherwise: the epsilon floor is spread equally over the alternatives above tau and the rest is allocated
    between tau and the alternatives not above it
    :param tau: selected candidate
    :param means: plug-in means of the scope
    :param covariance: plug-in covariance of single observations
    :param above: alternatives whose mean exceeds tau's
    :param batch_size: samples to allocate
    :param epsilon: fraction of the batch reserved for the alternatives above tau
    :return: the plan
    """
    p = len(means)
    above = sorted(int(i) for i in above)
    if not above:
        return cba_allocate(Cba_Inputs.from_covariance(tau, [i for i in range(p) if i != tau], means, covariance, batch_size))
    floor = min(epsilon_floor(epsilon, batch_size), batch_size)
    counts = np.zeros(p, dtype=np.int64)
    counts[above] = largest_remainder_round(np.ones(len(above)), floor)
    excluded = set(above)
    below = [i for i in range(p) if i != tau and i not in excluded]
    remaining = batch_size - floor
    if below:
        inner = cba_allocate(Cba_Inputs.from_covariance(tau, below, means, covariance, remaining))
        counts += inner.counts
    else:
        logger.warning(f"no alternative below candidate {tau}; remaining {remaining} samples go to the candidate")
        counts[tau] += remaining
    return Allocation_Plan(counts, batch_size, Allocation_Case.B, epsilon_floor=floor, tau=tau)


class Gba_Decision(NamedTuple):
    """
        Selection computed from a snapshot and the batch plan it implies
    """
    selection: Selection_Result
    plan: Allocation_Plan


def gba_step(store: Sample_Store, covariance: np.ndarray, batch_size: int, epsilon: float = DEFAULT_EPSILON,
             pcs_method: Pcs_Method = Pcs_Method.Bonferroni, draws: int = MIN_DRAWS, seed: int = 0,
             gap_floor: Optional[float] = None) -> Gba_Decision:
    """
    :param store: statistics of the scope
    :param covariance: plug-in covariance of single observations
    :param batch_size: samples to allocate
    :param epsilon: fraction of the batch reserved for alternatives above the candidate
    :param pcs_method: PCS evaluation used to pick the candidate
    :param draws: Monte Carlo draws per candidate
    :param seed: Monte Carlo seed
    :param gap_floor: indifference-zone floor for the Bonferroni bound
    :return: the probabilistic optimal selection and the batch plan
    """
    selection = select_pos(store.means, covariance, store.counts, pcs_method, draws, seed, gap_floor=gap_floor)
    plan = gba_allocate(selection.tau_star, store.means, covariance, store.alternatives_above(selection.tau_star), batch_size, epsilon)
    return Gba_Decision(selection, plan)


class Allocation_Policy(Enum):
    """
        Sequential batch policy; calling a member returns the plan for a snapshot
    """
    GBA = "gba"
    EQUAL = "equal"
    CBA = "cba"

    def __call__(self, store: Sample_Store, covariance: np.ndarray, selection: Selection_Result, batch_size: int,
                 epsilon: float = DEFAULT_EPSILON) -> Allocation_Plan:
        if self is Allocation_Policy.EQUAL:
            return equal_allocation(store.p, batch_size)
        if self is Allocation_Policy.CBA:
            best = store.best_mean_index()
            others: List[int] = [i for i in range(store.p) if i != best]
            return cba_allocate(Cba_Inputs.from_covariance(best, others, store.means, covariance, batch_size))
        return gba_allocate(selection.tau_star, store.means, covariance, store.alternatives_above(selection.tau_star), batch_size, epsilon)
