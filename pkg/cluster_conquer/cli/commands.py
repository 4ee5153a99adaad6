"""Subcommand implementations: each reads a validated configuration and writes its artifacts under an output directory"""
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from cluster_conquer.cli.provenance import write_csv, write_timings
from cluster_conquer.cli.verification import Check, run_suite
from cluster_conquer.clustering.pcc import pcc_sweep
from cluster_conquer.exceptions import Cluster_Conquer_Error
from cluster_conquer.problems.fixtures import FIXTURES, resolve_fixture
from cluster_conquer.problems.simulation import derive_seed, export_observations_csv, simulate
from cluster_conquer.procedures.Conquer_Config import Experiment_Config
from cluster_conquer.procedures.clustering_and_conquer import procedure_library
from cluster_conquer.procedures.macro_replication import macro_replicate
from cluster_conquer.selection.pcs_functions import bonferroni_sweep, monte_carlo_sweep

logger = logging.getLogger(__name__)


def _document(config: Experiment_Config) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def cmd_gen(config: Experiment_Config, out: Path, observations: int = 0) -> List[Path]:
    """
    Writes one problem JSON per configured problem and prints its size and eigenvalue range
    :param observations: when positive, also writes that many simulated replications of each problem as CSV
    :return: written paths
    """
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for p, spec in config.problems():
        path = out / f"problem_p{p}.json"
        spec.to_json(path)
        low, high = spec.eigenvalue_range
        print(f"{path}: p={spec.p} k={spec.k} min_eigenvalue={low:.6g} max_eigenvalue={high:.6g}")
        paths.append(path)
        if observations > 0:
            rows_path = out / f"observations_p{p}.csv"
            export_observations_csv(simulate(spec, observations, derive_seed(config.seed, p)), rows_path)
            paths.append(rows_path)
    return paths


def cmd_run(config: Experiment_Config, out: Path) -> Path:
    """
    Macro-replicates every configured procedure on every configured problem
    :return: path of the summary CSV
    """
    frames, summaries = [], []
    for p, spec in config.problems():
        for name in config.procedures:
            frame, summary = macro_replicate(spec, name, config.conquer, config.reps, config.seed)
            frames.append(frame.assign(p=p))
            summaries.append({"p": p, **summary})
    runs = pd.concat(frames, ignore_index=True)
    write_csv(runs, out / "runs.csv", "run", _document(config), config.seed)
    write_timings(runs, out / "runs_timing.csv")
    summary_path = write_csv(pd.DataFrame(summaries), out / "summary.csv", "run", _document(config), config.seed)
    for summary in summaries:
        print(f"{summary['procedure']} p={summary['p']}: PCS {summary['pcs']:.3f}, mean samples {summary['total_samples_mean']:.1f}")
    return summary_path


def pcs_table(fixture: str, draws: int, seed: int, n_jobs: int = 1) -> pd.DataFrame:
    """
    :param fixture: name in FIXTURES or one of its aliases
    :return: one row per setting with Monte Carlo PCS of every candidate, its standard error, the Bonferroni bounds and the
        candidate selected by each
    """
    fixture = resolve_fixture(fixture)
    rows = []
    for row, setting in enumerate(FIXTURES[fixture]()):
        means, covariance = np.array(setting.problem.mu), setting.problem.sigma
        pcs, errors = monte_carlo_sweep(means, covariance, setting.counts, draws, derive_seed(seed, row), n_jobs)
        bounds = bonferroni_sweep(means, covariance, setting.counts)
        record: Dict[str, Any] = {"setting": setting.label, **setting.problem.parameters,
                                  "counts": " ".join(str(c) for c in setting.counts)}
        record.update({f"pcs_{tau}": value for tau, value in enumerate(pcs)})
        record.update({f"se_{tau}": value for tau, value in enumerate(errors)})
        record.update({f"bound_{tau}": value for tau, value in enumerate(bounds)})
        record.update({"pos": int(np.argmax(pcs)), "pos_bound": int(np.argmax(bounds))})
        rows.append(record)
    return pd.DataFrame(rows)


def cmd_pcs_table(fixture: str, draws: int, seed: int, out: Path, n_jobs: int = 1) -> Path:
    """
    :return: path of the fixture table CSV
    """
    fixture = resolve_fixture(fixture)
    frame = pcs_table(fixture, draws, seed, n_jobs)
    return write_csv(frame, out / f"pcs_{fixture}.csv", "pcs-table", {"fixture": fixture, "draws": draws}, seed)


def cmd_pcc_sweep(config: Experiment_Config, out: Path) -> Path:
    """
    :return: path of the sweep CSV for the configured problem and clustering
    """
    (_, spec), *_ = config.problems()
    sweep = config.pcc
    frame = pcc_sweep(spec, config.conquer.clustering, sweep.n_values, sweep.p_s_values, sweep.reps, config.seed, sweep.delta_c,
                      config.conquer.workers, sweep.alpha_q)
    return write_csv(frame, out / "pcc_sweep.csv", "pcc-sweep", _document(config), config.seed)


def bench_rows(config: Experiment_Config, reps: int) -> pd.DataFrame:
    """
    :return: one row per (procedure, p); a failing row records its error and the sweep continues
    """
    rows = []
    for p, spec in config.problems():
        for name in config.procedures:
            try:
                _, summary = macro_replicate(spec, name, config.conquer, reps, config.seed)
                rows.append({"procedure": name, "p": p, "total_samples": summary["total_samples_mean"], "pcs_trad": summary["pcs"],
                             "pcs_standard_error": summary["pcs_standard_error"], "mopcs_proxy": summary["final_bound_mean"],
                             "wall_time": summary["wall_time_mean"], "error": ""})
            except (Cluster_Conquer_Error, ValueError, KeyError) as error:
                logger.error(f"{name} at p={p} failed: {error}")
                rows.append({"procedure": name, "p": p, "total_samples": np.nan, "pcs_trad": np.nan, "pcs_standard_error": np.nan,
                             "mopcs_proxy": np.nan, "wall_time": np.nan, "error": f"{type(error).__name__}: {error}"})
    return pd.DataFrame(rows)


def cmd_bench(config: Experiment_Config, reps: int, out: Path) -> Path:
    """
    :return: path of the benchmark CSV
    """
    for name in config.procedures:
        procedure_library.get_procedure(name)
    frame = bench_rows(config, reps)
    document = {**_document(config), "reps": reps}
    path = write_csv(frame, out / "bench.csv", "bench", document, config.seed)
    write_timings(frame, out / "bench_timing.csv")
    print(frame.drop(columns=["error"]).to_string(index=False))
    return path


def cmd_verify(suite: str, draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    :return: the checks of the suite, printed one per line
    """
    checks = run_suite(suite, draws, seed, n_jobs)
    for check in checks:
        print(f"[{'PASS' if check.passed else 'FAIL'}] {check.suite}: {check.name} ({check.detail})")
    return checks
