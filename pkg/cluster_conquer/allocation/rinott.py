"""Two-stage indifference-zone procedure with the Rinott constant"""
import logging
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_genlaguerre
from scipy.stats import norm

from cluster_conquer.allocation.Allocation_Plan import Allocation_Case
from cluster_conquer.allocation.Gba_Trace import Gba_Iteration, Gba_Trace
from cluster_conquer.exceptions import Convergence_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import Replication_Stream
from cluster_conquer.selection.Selection_Result import select_pos
from cluster_conquer.statistics.Covariance_Estimate import Covariance_Method
from cluster_conquer.statistics.Sample_Store import Sample_Store

logger = logging.getLogger(__name__)

QUADRATURE_NODES = (64, 128)
CONSTANT_TOLERANCE = 1e-3
_UPPER_LIMIT = 1e3


def _chi_square_rule(degrees: int, nodes: int):
    """Nodes and normalized weights for expectations over a chi-square variable"""
    roots, weights = roots_genlaguerre(nodes, degrees / 2.0 - 1.0)
    return 2.0 * roots, weights / weights.sum()


def _coverage(h: float, competitors: int, degrees: int, nodes: int) -> float:
    points, weights = _chi_square_rule(degrees, nodes)
    spread = np.sqrt(degrees * (1.0 / points[:, None] + 1.0 / points[None, :]))
    inner = norm.cdf(h / spread) @ weights
    return float(weights @ inner ** competitors)


def _solve(p: int, alpha: float, degrees: int, nodes: int) -> float:
    target = 1.0 - alpha
    competitors = p - 1
    if _coverage(0.0, competitors, degrees, nodes) >= target:
        return 0.0
    high = 1.0
    while _coverage(high, competitors, degrees, nodes) < target:
        high *= 2.0
        if high > _UPPER_LIMIT:
            raise Convergence_Error(f"Rinott constant exceeds {_UPPER_LIMIT} for p={p}, alpha={alpha}, {degrees} degrees of freedom")
    return float(brentq(lambda h: _coverage(h, competitors, degrees, nodes) - target, 0.0, high, xtol=1e-10))


@lru_cache(maxsize=None)
def rinott_constant(p: int, alpha: float, n0: int) -> float:
    """
    Solves E_Y[ E_X[ Phi(h / sqrt((n0 - 1)(1/X + 1/Y))) ]^(p-1) ] = 1 - alpha for chi-square X, Y with n0 - 1 degrees of freedom
    :param p: number of alternatives
    :param alpha: error probability
    :param n0: first-stage sample size
    :return: h
    """
    if p < 2:
        return 0.0
    if n0 < 2:
        raise ValueError(f"first-stage sample size must be at least 2, got {n0}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    coarse, fine = (_solve(p, alpha, n0 - 1, nodes) for nodes in QUADRATURE_NODES)
    if abs(coarse - fine) > CONSTANT_TOLERANCE * max(1.0, fine):
        raise Convergence_Error(f"Rinott quadrature did not settle: {coarse:.6f} with {QUADRATURE_NODES[0]} nodes, {fine:.6f} with {QUADRATURE_NODES[1]}")
    return fine


def rinott_sample_sizes(variances: np.ndarray, h: float, delta: float, n0: int) -> np.ndarray:
    """
    :return: max(n0, ceil((h s_i / delta)^2)) per alternative
    """
    required = np.ceil((h * h * np.asarray(variances, dtype=float)) / (delta * delta) - 1e-12)
    return np.maximum(n0, required).astype(np.int64)


def rinott_two_stage(spec: Problem_Spec, indices: Optional[Sequence[int]] = None, n0: int = 20, alpha: float = 0.1, delta: float = 0.1,
                     seed: int = 0, initial_observations: Optional[np.ndarray] = None) -> Gba_Trace:
    """
    :param spec: sample source
    :param indices: scope of alternatives, all when None
    :param n0: first-stage sample size
    :param alpha: error probability
    :param delta: indifference-zone parameter
    :param seed: stream seed
    :param initial_observations: first-stage replications already drawn, used instead of sampling
    :return: trace selecting the largest final sample mean
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    stream = Replication_Stream(spec, indices, seed)
    if initial_observations is None:
        store = Sample_Store.from_observations(stream.full_rows(0, n0))
    else:
        store = Sample_Store.from_observations(initial_observations)
        n0 = int(store.counts.min())
    trace = Gba_Trace(stream.indices, store, 0 if initial_observations is None else store.total_samples)
    if stream.p == 1:
        trace.selected = 0
        trace.stop_reason = "single_alternative"
        trace.new_samples = stream.samples_drawn
        return trace
    h = rinott_constant(stream.p, alpha, n0)
    targets = rinott_sample_sizes(store.variances, h, delta, n0)
    extra = np.maximum(targets - store.counts, 0)
    for local, count in enumerate(extra):
        store.add(local, stream.observations(local, int(store.counts[local]), int(count)))
    trace.selected = store.best_mean_index()
    trace.final = select_pos(store.means, store.plug_in_covariance(Covariance_Method.Sample(store).correlation()), store.counts)
    trace.record(Gba_Iteration(1, trace.selected, Allocation_Case.Rinott.value, float(trace.final.pcs[trace.selected]),
                               store.total_samples, int(extra.sum()), float(np.mean(extra == 0))))
    trace.stop_reason = "rinott"
    trace.new_samples = stream.samples_drawn
    logger.info(f"Rinott h = {h:.4f} over {stream.p} alternatives; {int(extra.sum())} second-stage samples")
    return trace
