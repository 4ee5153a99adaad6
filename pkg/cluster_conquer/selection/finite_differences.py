"""Central finite differences of Monte Carlo PCS with common random numbers"""
from typing import Callable, NamedTuple, Tuple

import numpy as np

from cluster_conquer.problems.fixtures import FIXTURE_MEANS, GRID_COUNTS, fixture_problem
from cluster_conquer.problems.simulation import symmetric_factor
from cluster_conquer.selection.Pcs_Context import Pcs_Parameters
from cluster_conquer.selection.pcs_functions import MIN_DRAWS, strict_wins

_CHUNK = 100_000


class Finite_Difference(NamedTuple):
    """
        Derivative estimate and its standard error
    """
    estimate: float
    standard_error: float

    @property
    def z_score(self) -> float:
        """
        :return: estimate in units of its standard error
        """
        return self.estimate / self.standard_error if self.standard_error > 0 else float(np.sign(self.estimate) * np.inf)


def fd_probe(parameter_builder: Callable[[float], Pcs_Parameters], value: float, step: float, tau: int,
             draws: int = 10 ** 6, seed: int = 0) -> Finite_Difference:
    """
    Both evaluations reuse the same standard normal draws, so the derivative estimate is the mean of per-draw indicator differences
    :param parameter_builder: maps the probed quantity to PCS parameters
    :param value: point at which to differentiate
    :param step: half-width h
    :param tau: candidate whose PCS is differentiated
    :param draws: Monte Carlo draws
    :param seed: generator seed
    :return: (PCS(value + h) - PCS(value - h)) / 2h with its standard error
    """
    if draws < MIN_DRAWS:
        raise ValueError(f"draws must be at least {MIN_DRAWS}, got {draws}")
    upper, lower = parameter_builder(value + step), parameter_builder(value - step)
    upper_factor, lower_factor = symmetric_factor(upper.mean_covariance), symmetric_factor(lower.mean_covariance)
    rng = np.random.default_rng(seed)
    total, total_square = 0.0, 0.0
    for start in range(0, draws, _CHUNK):
        z = rng.standard_normal((min(_CHUNK, draws - start), upper.p))
        difference = (strict_wins(upper.means + z @ upper_factor.T, tau).astype(float)
                      - strict_wins(lower.means + z @ lower_factor.T, tau).astype(float))
        total += difference.sum()
        total_square += np.square(difference).sum()
    mean = total / draws
    variance = max(total_square / draws - mean * mean, 0.0)
    scale = 2.0 * step
    return Finite_Difference(mean / scale, float(np.sqrt(variance / draws)) / scale)


def fixture_parameter_builder(quantity: str, x: float, y: float, means: Tuple[float, ...] = FIXTURE_MEANS,
                              counts: Tuple[int, ...] = GRID_COUNTS) -> Callable[[float], Pcs_Parameters]:
    """
    :param quantity: "x" or "y", the fixture covariance to vary
    :param x: covariance of alternative 1 with the rest
    :param y: covariance of alternative 5 with alternatives 2-4
    :param means: true means
    :param counts: sample sizes
    :return: builder of parameters with the chosen quantity replaced
    """
    if quantity not in ("x", "y"):
        raise ValueError(f"unknown fixture quantity {quantity}")

    def builder(value: float) -> Pcs_Parameters:
        problem = fixture_problem(value, y, means) if quantity == "x" else fixture_problem(x, value, means)
        return Pcs_Parameters.from_problem(problem, counts)

    return builder
