"""Sequential batch allocation over a scope of alternatives until a stopping rule is met"""
import logging
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from cluster_conquer.allocation.Allocation_Plan import Allocation_Plan, largest_remainder_round
from cluster_conquer.allocation.Gba_Trace import Gba_Iteration, Gba_Trace
from cluster_conquer.allocation.allocation_policies import DEFAULT_EPSILON, Allocation_Policy
from cluster_conquer.allocation.rinott import rinott_constant, rinott_sample_sizes
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import Replication_Stream, derive_seed
from cluster_conquer.selection.Selection_Result import Selection_Result, select_pos
from cluster_conquer.selection.pcs_functions import MIN_DRAWS, Pcs_Method, mopcs_bonferroni
from cluster_conquer.statistics.Covariance_Estimate import Covariance_Method
from cluster_conquer.statistics.Sample_Store import Sample_Store
from cluster_conquer.stopping_criteria.stopping_criteria import Stopping_Rule

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05


class Selection_Rule(str, Enum):
    """
        Which alternative a finished run reports
    """
    Pos = "pos"
    Mean = "mean"


def _clip_to_caps(plan: Allocation_Plan, room: np.ndarray) -> np.ndarray:
    counts = np.minimum(plan.counts, room)
    if counts.sum() == 0 and room.sum() > 0:
        open_alternatives = np.flatnonzero(room > 0)
        shares = largest_remainder_round(np.ones(open_alternatives.size), int(min(plan.batch_size, room.sum())))
        counts[open_alternatives] = np.minimum(shares, room[open_alternatives])
    return counts


class _Gba_Run:
    """
        State of one sequential run: stream, store, frozen correlation and the trace
    """

    def __init__(self, spec: Problem_Spec, indices: Optional[Sequence[int]], n0: int, seed: int, estimator: Covariance_Method,
                 initial_observations: Optional[np.ndarray]):
        self.stream = Replication_Stream(spec, indices, derive_seed(seed, 0))
        self.pcs_seed = derive_seed(seed, 1)
        self.estimator = estimator
        if initial_observations is None:
            self.prefix = self.stream.full_rows(0, n0)
            provided = 0
        else:
            self.prefix = np.atleast_2d(np.asarray(initial_observations, dtype=float))
            assert self.prefix.shape[1] == self.stream.p, f"{self.prefix.shape[1]} initial columns for a scope of {self.stream.p}"
            provided = self.prefix.size
        self.store = Sample_Store.from_observations(self.prefix)
        self.correlation = estimator(self.store).correlation()
        self.refreshed_rows = self.prefix.shape[0]
        self.trace = Gba_Trace(self.stream.indices, self.store, provided)

    @property
    def covariance(self) -> np.ndarray:
        return self.store.plug_in_covariance(self.correlation)

    def evaluate(self, iteration: int, pcs_method: Pcs_Method, draws: int, gap_floor: Optional[float], n_jobs: int) -> Selection_Result:
        covariance = self.covariance
        selection = select_pos(self.store.means, covariance, self.store.counts, pcs_method, draws, derive_seed(self.pcs_seed, iteration),
                               n_jobs, gap_floor)
        if selection.bound_raw is None:
            selection.bound_raw = mopcs_bonferroni(self.store.means, covariance, self.store.counts, selection.tau_star, gap_floor).raw
        return selection

    def simulate(self, counts: np.ndarray):
        for local in np.flatnonzero(counts):
            start = int(self.store.counts[local])
            self.store.add(int(local), self.stream.observations(int(local), start, int(counts[local])))

    def refresh_correlation(self):
        """Re-estimates the correlation from every replication all alternatives share"""
        shared = int(self.store.counts.min())
        if shared <= self.refreshed_rows:
            return
        start = self.prefix.shape[0]
        rows = np.vstack([self.prefix, self.stream.full_rows(start, shared - start, replay=True)])
        self.correlation = self.estimator(Sample_Store.from_observations(rows)).correlation()
        self.refreshed_rows = shared
        logger.debug(f"correlation refreshed from {shared} shared replications")


def run_gba(spec: Problem_Spec, indices: Optional[Sequence[int]] = None, n0: int = 20, batch_size: Optional[int] = None,
            stopping: Optional[Stopping_Rule] = None, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
            policy: Allocation_Policy = Allocation_Policy.GBA, pcs_method: Pcs_Method = Pcs_Method.Bonferroni, draws: int = MIN_DRAWS,
            estimator: Covariance_Method = Covariance_Method.Sample, initial_observations: Optional[np.ndarray] = None,
            single_batch: bool = False, refresh_correlation: bool = False, indifference_zone: Optional[float] = None,
            selection: Selection_Rule = Selection_Rule.Pos, n_jobs: int = 1) -> Gba_Trace:
    """
    Equal initialization, then batches of {select, allocate, simulate, check}
    :param spec: sample source
    :param indices: scope of alternatives, all when None
    :param n0: initialization sample size per alternative
    :param batch_size: samples per batch, twice the scope size when None
    :param stopping: stopping rule, fixed precision at alpha = 0.05 when None
    :param epsilon: fraction of each case (b) batch reserved for alternatives above the candidate
    :param seed: seed of the replication stream and Monte Carlo evaluations
    :param policy: batch policy
    :param pcs_method: PCS evaluation that picks the candidate
    :param draws: Monte Carlo draws per candidate
    :param estimator: correlation estimator applied to the initialization replications
    :param initial_observations: full-vector replications already drawn, used instead of initialization sampling
    :param single_batch: allocate the whole remaining budget in one batch
    :param refresh_correlation: re-estimate the correlation whenever every alternative has more shared replications
    :param indifference_zone: floor for positive mean gaps in the bound; also caps each alternative at its Rinott size
    :param selection: report the candidate or the largest sample mean
    :param n_jobs: workers for Monte Carlo evaluations
    :return: the trace
    """
    p = spec.p if indices is None else len(indices)
    if p < 2:
        raise ValueError("sequential allocation needs a scope of at least two alternatives")
    if initial_observations is None and n0 < 2:
        raise ValueError(f"n0 must be at least 2, got {n0}")
    stopping = Stopping_Rule.fixed_precision(DEFAULT_ALPHA) if stopping is None else stopping
    batch_size = 2 * p if batch_size is None else batch_size
    run = _Gba_Run(spec, indices, n0, seed, estimator, initial_observations)
    trace, store = run.trace, run.store
    caps = None
    if indifference_zone is not None:
        h = rinott_constant(p, stopping.alpha if stopping.alpha is not None else DEFAULT_ALPHA, int(store.counts.min()))
        caps = rinott_sample_sizes(store.variances, h, indifference_zone, int(store.counts.min()))

    current = run.evaluate(0, pcs_method, draws, indifference_zone, n_jobs)
    record = Gba_Iteration(0, current.tau_star, "init", float(current.bound_raw), store.total_samples, 0, 0.0)
    trace.record(record)
    reason = stopping.reason(record, trace)
    iteration = 0
    while reason is None:
        iteration += 1
        remaining = stopping.remaining(trace)
        size = remaining if single_batch else min(batch_size, remaining)
        if size == 0:
            reason = "budget" if stopping.budget is not None else "cap"
            break
        plan = policy(store, run.covariance, current, size, epsilon)
        counts = plan.counts
        if caps is not None:
            room = np.maximum(caps - store.counts, 0)
            if room.sum() == 0:
                reason = "indifference_zone"
                break
            counts = _clip_to_caps(plan, room)
        run.simulate(counts)
        if refresh_correlation:
            run.refresh_correlation()
        current = run.evaluate(iteration, pcs_method, draws, indifference_zone, n_jobs)
        record = Gba_Iteration(iteration, current.tau_star, plan.case.value, float(current.bound_raw), store.total_samples,
                               int(counts.sum()), float(np.mean(counts == 0)))
        trace.record(record)
        logger.debug(f"batch {iteration}: candidate {current.tau_star}, case {plan.case.value}, bound {current.bound_raw:.4f}, "
                     f"{store.total_samples} samples")
        reason = stopping.reason(record, trace)
        if reason is None and single_batch:
            reason = "single_batch"
    if reason == "cap":
        logger.warning(f"sample cap reached over {p} alternatives with bound {current.bound_raw:.4f}")
    trace.stop_reason = reason
    trace.final = current
    trace.selected = current.tau_star if Selection_Rule(selection) is Selection_Rule.Pos else store.best_mean_index()
    trace.new_samples = run.stream.samples_drawn
    return trace
