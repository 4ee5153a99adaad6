"""Clustering and conquer: initialize, cluster by correlation, select a local best per cluster in parallel, then select among the local bests"""
import logging
import time
from contextlib import contextmanager
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from cluster_conquer.allocation.Allocation_Plan import largest_remainder_round
from cluster_conquer.allocation.Gba_Trace import Gba_Trace
from cluster_conquer.allocation.allocation_policies import Allocation_Policy
from cluster_conquer.allocation.rinott import rinott_two_stage
from cluster_conquer.allocation.sequential_allocation import Selection_Rule, run_gba
from cluster_conquer.clustering.Cluster_Partition import Cluster_Partition, Provenance
from cluster_conquer.clustering.Clustering_Config import Clustering_Method
from cluster_conquer.clustering.alternative_clustering import random_partition
from cluster_conquer.clustering.few_shot_clustering import cluster_alternatives
from cluster_conquer.exceptions import Stage_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import Replication_Stream, derive_seed
from cluster_conquer.procedures.Conquer_Config import Budget_Mode, Conquer_Config, Engine
from cluster_conquer.procedures.Run_Record import STAGES, Run_Record
from cluster_conquer.procedures.procedure_registration import make_procedure_library
from cluster_conquer.selection.pcs_functions import Pcs_Method
from cluster_conquer.statistics.Covariance_Estimate import Covariance_Method
from cluster_conquer.stopping_criteria.stopping_criteria import Stopping_Rule

logger = logging.getLogger(__name__)

procedure, procedure_library = make_procedure_library("selection procedures")

_POLICIES = {Engine.GBA: Allocation_Policy.GBA, Engine.Equal: Allocation_Policy.EQUAL, Engine.CBA: Allocation_Policy.CBA}
_ENGINE_TAGS = {Engine.GBA: "gba", Engine.Equal: "ea", Engine.CBA: "cba", Engine.Rinott: "rinott"}


class Cluster_Outcome(NamedTuple):
    """
        Result of the within-cluster stage for one cluster
    """
    local_best: int
    new_samples: int
    bound: Optional[float]
    stop_reason: Optional[str]


@contextmanager
def _stage(name: str, seconds: Dict[str, float]):
    start = time.perf_counter()
    try:
        yield
    except Stage_Error:
        raise
    except Exception as error:
        raise Stage_Error(name, error) from error
    finally:
        seconds[name] += time.perf_counter() - start


def run_engine(engine: Engine, spec: Problem_Spec, scope: Sequence[int], config: Conquer_Config, alpha: float, budget: Optional[int],
               seed: int, initial_observations: Optional[np.ndarray]) -> Gba_Trace:
    """
    :param engine: selection engine
    :param spec: sample source
    :param scope: alternatives to select among
    :param config: run parameters
    :param alpha: error probability of this stage
    :param budget: total samples of this stage in fixed-budget mode, initialization included
    :param seed: stream seed
    :param initial_observations: full-vector replications of the scope to start from
    :return: trace of the engine
    """
    if engine is Engine.Rinott:
        return rinott_two_stage(spec, scope, config.n0, alpha, config.rinott_delta, seed, initial_observations)
    if config.budget_mode is Budget_Mode.Fixed_Budget:
        stopping = Stopping_Rule.fixed_budget(budget)
    else:
        stopping = Stopping_Rule.fixed_precision(alpha, config.cap_per_alternative)
    return run_gba(spec, scope, config.n0, config.batch_multiplier * len(scope), stopping, config.epsilon, seed, _POLICIES[engine],
                   Pcs_Method(config.pcs_method), config.mc_draws, Covariance_Method(config.clustering.estimator), initial_observations,
                   refresh_correlation=config.refresh_correlation, indifference_zone=config.indifference_zone,
                   selection=Selection_Rule(config.selection))


def conquer_cluster(spec: Problem_Spec, members: np.ndarray, config: Conquer_Config, seed: int,
                    initial_observations: Optional[np.ndarray], budget: Optional[int]) -> Cluster_Outcome:
    """
    :param members: alternatives of the cluster
    :return: the local best, the samples drawn and the final bound; a single member is its own local best
    """
    if members.size == 1:
        return Cluster_Outcome(int(members[0]), 0, None, "single_alternative")
    trace = run_engine(config.stage2_engine, spec, members, config, config.alpha1, budget, seed, initial_observations)
    bound = None if trace.final is None else trace.final.bound_raw
    return Cluster_Outcome(trace.selected_index, trace.new_samples, bound, trace.stop_reason)


def _fresh_initialization(partition: Cluster_Partition, config: Conquer_Config) -> int:
    if config.reuse_stage1_samples:
        return 0
    sizes = partition.sizes
    stage3 = partition.k if partition.k > 1 else 0
    return int(config.n0 * (sizes[sizes > 1].sum() + stage3))


def _stage_two_budgets(partition: Cluster_Partition, config: Conquer_Config, spent: int) -> Dict[int, Optional[int]]:
    if config.budget_mode is not Budget_Mode.Fixed_Budget:
        return {label: None for label in range(partition.k)}
    reserve = int(round(config.total_budget * config.alpha2 / config.alpha))
    # initialization drawn fresh in stages 2 and 3 comes out of the shared pool
    pool = config.total_budget - spent - reserve - _fresh_initialization(partition, config)
    if pool < 0:
        logger.warning(f"budget {config.total_budget} is exhausted by initialization and clustering; stage 2 gets no extra samples")
        pool = 0
    sizes = partition.sizes.astype(float)
    sizes[sizes == 1] = 0.0
    shares = largest_remainder_round(sizes, pool) if sizes.sum() > 0 else np.zeros(partition.k, dtype=np.int64)
    return {label: int(config.n0 * partition.sizes[label] + shares[label]) for label in range(partition.k)}


def _stage_three_budget(config: Conquer_Config, k: int) -> Optional[int]:
    if config.budget_mode is not Budget_Mode.Fixed_Budget:
        return None
    reserve = int(round(config.total_budget * config.alpha2 / config.alpha))
    return reserve + config.n0 * k


def run_p3c(spec: Problem_Spec, config: Conquer_Config, procedure_name: str = "p3c-gba") -> Run_Record:
    """
    Stage 0 draws n0 full-vector replications; stage 1 partitions the alternatives; stage 2 selects a local best per cluster on
    a worker pool at precision 1 - alpha1 (or a size-proportional budget share); stage 3 selects among the local bests at 1 - alpha2
    :param spec: the problem
    :param config: run parameters
    :param procedure_name: name recorded in the run record
    :return: the run record
    :raises Stage_Error: any stage failure, tagged with the stage
    """
    seeds = [derive_seed(config.seed, stage) for stage in range(4)]
    samples = {stage: 0 for stage in STAGES}
    seconds = {stage: 0.0 for stage in STAGES}

    with _stage("stage0", seconds):
        stream = Replication_Stream(spec, None, seeds[0])
        rows = stream.full_rows(0, config.n0)
        samples["stage0"] = stream.samples_drawn

    with _stage("clustering", seconds):
        clustering = config.clustering
        if clustering.method is Clustering_Method.Random:
            partition = random_partition(spec.p, clustering.k, seeds[1])
        else:
            n = config.n0 if clustering.n is None else clustering.n
            observations = None
            if clustering.reuse_samples:
                observations = np.vstack([rows, stream.full_rows(config.n0, n - config.n0)]) if n > config.n0 else rows
            partition = cluster_alternatives(spec, clustering, n, seeds[1], config.workers, observations)
        samples["clustering"] = stream.samples_drawn - samples["stage0"] + partition.total_sample_cost
        logger.info(f"Stage 1: {partition.k} clusters of sizes {partition.sizes.tolist()} with {samples['clustering']} samples")

    with _stage("stage2", seconds):
        budgets = _stage_two_budgets(partition, config, samples["stage0"] + samples["clustering"])
        order = sorted(range(partition.k), key=lambda label: (-partition.sizes[label], label))
        tasks = []
        for label in order:
            members = partition.members(label)
            initial = rows[:, members] if config.reuse_stage1_samples else None
            tasks.append(delayed(conquer_cluster)(spec, members, config, derive_seed(seeds[2], label), initial, budgets[label]))
        results = Parallel(n_jobs=config.workers)(tasks)
        outcomes = [outcome for _, outcome in sorted(zip(order, results))]
        samples["stage2"] = sum(outcome.new_samples for outcome in outcomes)
        local_bests = [outcome.local_best for outcome in outcomes]
        for label, outcome in enumerate(outcomes):
            logger.info(f"Stage 2: cluster {label} selected alternative {outcome.local_best} after {outcome.new_samples} samples")

    stage3_bound = None
    with _stage("stage3", seconds):
        if len(local_bests) == 1:
            selected = local_bests[0]
        else:
            initial = rows[:, local_bests] if config.reuse_stage1_samples else None
            trace = run_engine(config.stage3_engine, spec, local_bests, config, config.alpha2,
                               _stage_three_budget(config, len(local_bests)), seeds[3], initial)
            selected = trace.selected_index
            samples["stage3"] = trace.new_samples
            stage3_bound = None if trace.final is None else trace.final.bound_raw
        logger.info(f"Stage 3: selected alternative {selected} among {len(local_bests)} local bests")

    return Run_Record(procedure_name, int(selected), spec.best_index, partition, local_bests, samples, seconds,
                      [outcome.bound for outcome in outcomes], stage3_bound, [outcome.stop_reason for outcome in outcomes])


run_clustering_conquer = run_p3c


def run_divide_conquer(spec: Problem_Spec, config: Conquer_Config, procedure_name: str = "dc-gba") -> Run_Record:
    """
    Clustering and conquer with a seeded random partition into near-equal groups in place of correlation clustering
    """
    random_clustering = config.clustering.model_copy(update={"method": Clustering_Method.Random})
    return run_p3c(spec, config.model_copy(update={"clustering": random_clustering}), procedure_name)


def run_single_processor(spec: Problem_Spec, config: Conquer_Config, engine: Engine, procedure_name: str) -> Run_Record:
    """
    One engine over every alternative at precision 1 - alpha (or the whole budget)
    """
    seconds = {stage: 0.0 for stage in STAGES}
    samples = {stage: 0 for stage in STAGES}
    with _stage("stage0", seconds):
        stream = Replication_Stream(spec, None, derive_seed(config.seed, 0))
        rows = stream.full_rows(0, config.n0)
        samples["stage0"] = stream.samples_drawn
    with _stage("stage2", seconds):
        trace = run_engine(engine, spec, np.arange(spec.p), config, config.alpha, config.total_budget, derive_seed(config.seed, 2), rows)
        samples["stage2"] = trace.new_samples
    partition = Cluster_Partition(np.zeros(spec.p, dtype=int), provenance=Provenance.Single)
    bound = None if trace.final is None else trace.final.bound_raw
    return Run_Record(procedure_name, int(trace.selected_index), spec.best_index, partition, [int(trace.selected_index)], samples, seconds,
                      [bound], None, [trace.stop_reason])


def _with_engine(config: Conquer_Config, engine: Engine) -> Conquer_Config:
    return config.model_copy(update={"stage2_engine": engine, "stage3_engine": engine})


@procedure("p3c-gba", aliases=("cc-gba",), engine=Engine.GBA)
@procedure("p3c-ea", aliases=("cc-ea",), engine=Engine.Equal)
@procedure("p3c-cba", aliases=("cc-cba",), engine=Engine.CBA)
def clustering_and_conquer(spec: Problem_Spec, config: Conquer_Config, engine: Engine) -> Run_Record:
    """
    Correlation clustering followed by the engine in both selection stages
    """
    return run_p3c(spec, _with_engine(config, engine), f"p3c-{_ENGINE_TAGS[engine]}")


@procedure("dc-gba", engine=Engine.GBA)
@procedure("dc-ea", engine=Engine.Equal)
@procedure("dc-cba", engine=Engine.CBA)
def divide_and_conquer(spec: Problem_Spec, config: Conquer_Config, engine: Engine) -> Run_Record:
    """
    Random partition followed by the engine in both selection stages
    """
    return run_divide_conquer(spec, _with_engine(config, engine), f"dc-{_ENGINE_TAGS[engine]}")


@procedure("gba", engine=Engine.GBA)
@procedure("ea", engine=Engine.Equal)
@procedure("cba", engine=Engine.CBA)
@procedure("rinott", engine=Engine.Rinott)
def single_processor(spec: Problem_Spec, config: Conquer_Config, engine: Engine) -> Run_Record:
    """
    The engine over every alternative without partitioning
    """
    return run_single_processor(spec, config, engine, _ENGINE_TAGS[engine])
