"""Numerical probes of the sign and monotonicity consequences of the mean-correlation interaction"""
import logging
from typing import Callable, Dict, List, NamedTuple

import numpy as np

from cluster_conquer.clustering.Clustering_Config import Clustering_Config
from cluster_conquer.clustering.pcc import pcc_sweep
from cluster_conquer.problems.fixtures import sample_size_settings
from cluster_conquer.problems.problem_builders import Block_Model_Spec, build_block_model
from cluster_conquer.problems.simulation import derive_seed
from cluster_conquer.selection.Selection_Result import select_pos
from cluster_conquer.selection.finite_differences import fd_probe, fixture_parameter_builder
from cluster_conquer.selection.pcs_functions import Pcs_Method, monte_carlo_sweep

logger = logging.getLogger(__name__)

PROBE_X = 0.02
PROBE_Y = 0.02
PROBE_STEP = 0.005
SIGNIFICANCE = 2.0
PCC_N_VALUES = (50, 200)
PCC_REPS = 100


class Check(NamedTuple):
    """
        Outcome of one probe
    """
    suite: str
    name: str
    passed: bool
    value: float
    detail: str


def sign_checks(draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    Raising the covariance of the best alternative with its competitors raises its PCS; raising the covariance of the worst
    alternative with its peers lowers the worst's PCS. Each derivative must differ from zero by SIGNIFICANCE standard errors
    """
    probes = [("dPCS(0)/dx", "x", 0, 1.0), ("dPCS(0)/dy", "y", 0, 1.0), ("dPCS(4)/dx", "x", 4, -1.0), ("dPCS(4)/dy", "y", 4, -1.0)]
    checks = []
    for index, (name, quantity, tau, sign) in enumerate(probes):
        builder = fixture_parameter_builder(quantity, PROBE_X, PROBE_Y)
        value = PROBE_X if quantity == "x" else PROBE_Y
        derivative = fd_probe(builder, value, PROBE_STEP, tau, draws, derive_seed(seed, index))
        passed = sign * derivative.z_score >= SIGNIFICANCE
        checks.append(Check("signs", name, passed, derivative.estimate,
                            f"estimate {derivative.estimate:.4g} +/- {derivative.standard_error:.2g}, expected sign {sign:+.0f}"))
    return checks


def preference_checks(draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    Two candidates share mean and variance; the first is strongly correlated with the competitors and the second is not.
    Selection by PCS must prefer the first under both PCS evaluations
    """
    means = np.array([1.0, 1.0, 0.8, 0.8])
    covariance = np.array([[1.0, 0.0, 0.8, 0.8],
                           [0.0, 1.0, 0.0, 0.0],
                           [0.8, 0.0, 1.0, 0.5],
                           [0.8, 0.0, 0.5, 1.0]])
    counts = np.full(4, 10)
    checks = []
    for method in Pcs_Method:
        result = select_pos(means, covariance, counts, method, draws, seed, n_jobs)
        checks.append(Check("pos-preference", method.value, result.tau_star == 0, float(result.pcs[0] - result.pcs[1]),
                            f"PCS {np.round(result.pcs, 4).tolist()}, selected {result.tau_star}"))
    return checks


def negative_n1_checks(draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    In the low-confidence setting more samples of the first alternative lower the best attainable PCS, and the second alternative
    stays the selection throughout
    """
    settings = [s for s in sample_size_settings() if s.label.startswith("low")]
    mopcs, choices = {}, []
    for row, setting in enumerate(settings):
        pcs, _ = monte_carlo_sweep(np.array(setting.problem.mu), setting.problem.sigma, setting.counts, draws, derive_seed(seed, row), n_jobs)
        mopcs[int(setting.counts[0])] = float(pcs.max())
        choices.append(int(np.argmax(pcs)))
    first, last = min(mopcs), max(mopcs)
    return [Check("negative-n1", f"moPCS(N1={last}) < moPCS(N1={first})", mopcs[last] < mopcs[first], mopcs[last] - mopcs[first],
                  f"moPCS {mopcs[last]:.4f} at N1={last}, {mopcs[first]:.4f} at N1={first}"),
            Check("negative-n1", "selected alternative 1", all(c == 1 for c in choices), float(np.mean(np.array(choices) == 1)),
                  f"selections {choices}")]


def pcc_bound_checks(draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    The correct-clustering lower bound must not exceed the empirical rate beyond its sampling error
    """
    spec = build_block_model(Block_Model_Spec(cluster_sizes=[16] * 4, intra_corr=0.6, inter_corr=0.1))
    frame = pcc_sweep(spec, Clustering_Config(k=4), PCC_N_VALUES, [32], PCC_REPS, seed, delta_c=0.1, n_jobs=n_jobs)
    checks = []
    for row in frame.itertuples():
        slack = row.empirical_pcc + 1.96 * row.standard_error - row.lower_bound
        checks.append(Check("pcc-bounds", f"n={row.n}", slack >= 0, float(slack),
                            f"bound {row.lower_bound:.3f}, empirical {row.empirical_pcc:.3f} +/- {row.standard_error:.3f}"))
    return checks


SUITES: Dict[str, Callable[[int, int, int], List[Check]]] = {
    "signs": sign_checks,
    "pos-preference": preference_checks,
    "negative-n1": negative_n1_checks,
    "pcc-bounds": pcc_bound_checks,
}


def run_suite(suite: str, draws: int, seed: int, n_jobs: int = 1) -> List[Check]:
    """
    :param suite: name in SUITES
    :return: the checks of the suite
    :raises KeyError: unknown suite
    """
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; available: {', '.join(SUITES)}")
    checks = SUITES[suite](draws, seed, n_jobs)
    for check in checks:
        if not check.passed:
            logger.warning(f"{check.suite}: {check.name} failed ({check.detail})")
    return checks
