"""Independent macro-replications of a registered procedure and their summary"""
import logging
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.simulation import derive_seed
from cluster_conquer.procedures.Conquer_Config import Conquer_Config
from cluster_conquer.procedures.Run_Record import STAGES
from cluster_conquer.procedures.clustering_and_conquer import procedure_library

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95


def _replicate(spec: Problem_Spec, procedure_name: str, config: Conquer_Config, rep: int) -> Dict[str, Any]:
    record = procedure_library.get_procedure(procedure_name)(spec, config)
    return {"rep": rep, "seed": config.seed, **record.to_row()}


def macro_replicate(spec: Problem_Spec, procedure_name: str, config: Conquer_Config, reps: int, seed: int = 0,
                    n_jobs: int = 1) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """
    Runs the procedure reps times with seeds derived from seed; each run keeps config.workers for its own stages
    :param spec: the problem
    :param procedure_name: registered procedure
    :param config: run parameters; the seed is replaced per replication
    :param reps: number of replications
    :param seed: root seed
    :param n_jobs: replications run in parallel
    :return: one row per replication and the summary over them
    """
    if reps < 1:
        raise ValueError(f"reps must be positive, got {reps}")
    procedure_library.get_procedure(procedure_name)
    configs = [config.model_copy(update={"seed": derive_seed(seed, rep)}) for rep in range(reps)]
    rows = Parallel(n_jobs=n_jobs)(delayed(_replicate)(spec, procedure_name, configs[rep], rep) for rep in range(reps))
    frame = pd.DataFrame(rows)
    summary = summarize_replications(frame)
    logger.info(f"{procedure_name}: PCS {summary['pcs']:.3f} over {reps} replications, "
                f"mean samples {summary['total_samples_mean']:.1f}")
    return frame, summary


def _mean_interval(values: np.ndarray) -> Tuple[float, float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, mean, mean
    half = float(stats.t.ppf(0.5 + CONFIDENCE / 2, values.size - 1) * stats.sem(values))
    if not np.isfinite(half):
        half = 0.0
    return mean, mean - half, mean + half


def summarize_replications(frame: pd.DataFrame) -> Dict[str, Any]:
    """
    :param frame: rows from macro_replicate
    :return: fraction correct with its standard error, sample and time means, and the mean final bounds
    """
    reps = len(frame)
    pcs = float(frame["correct"].mean())
    samples_mean, samples_low, samples_high = _mean_interval(frame["total_samples"].to_numpy(dtype=float))
    summary = {"procedure": frame["procedure"].iloc[0], "reps": reps, "pcs": pcs,
               "pcs_standard_error": float(np.sqrt(pcs * (1 - pcs) / reps)),
               "total_samples_mean": samples_mean, "total_samples_ci_low": samples_low, "total_samples_ci_high": samples_high,
               "final_bound_mean": _nan_mean(frame["final_bound"]),
               "stage2_weighted_bound_mean": _nan_mean(frame["stage2_weighted_bound"]),
               "stage3_bound_mean": _nan_mean(frame["stage3_bound"]),
               "wall_time_mean": float(frame["wall_time"].mean())}
    summary.update({f"{stage}_samples_mean": float(frame[f"{stage}_samples"].mean()) for stage in STAGES})
    return summary


def _nan_mean(column: pd.Series) -> float:
    values = pd.to_numeric(column, errors="coerce")
    return float(values.mean()) if values.notna().any() else float("nan")
