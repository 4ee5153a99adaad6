"""Five-alternative fixtures on the interaction of means, correlations and sample sizes"""
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from cluster_conquer.problems.Problem_Spec import Problem_Spec

FIXTURE_MEANS: Tuple[float, ...] = (2.1, 2.0, 1.95, 1.9, 1.9)
LOW_CONFIDENCE_MEANS: Tuple[float, ...] = (2.01, 2.0, 1.95, 1.9, 1.9)
FIXTURE_VARIANCE: float = 0.1
PEER_COVARIANCE: float = 0.01

GRID_X: Tuple[float, ...] = (0.01, 0.02, 0.03, 0.05)
GRID_Y: Tuple[float, ...] = (0.0, 0.02, 0.04, 0.06)
GRID_COUNTS: Tuple[int, ...] = (10, 10, 10, 10, 10)
NOT_POSITIVE_DEFINITE_CELL: Tuple[float, float] = (0.05, 0.06)
# PCS(5) of this cell breaks the monotone trend of its column
OUTLIER_CELL: Tuple[float, float] = (0.01, 0.04)

# (x, y) -> (PCS(1), PCS(5)) from Monte Carlo integration with 10 samples per alternative
CORRELATION_GRID_REFERENCE: Dict[Tuple[float, float], Tuple[float, float]] = {
    (0.01, 0.0): (0.6707, 0.0349), (0.01, 0.02): (0.6741, 0.0269), (0.01, 0.04): (0.6875, 0.1777), (0.01, 0.06): (0.6879, 0.0051),
    (0.02, 0.0): (0.6852, 0.0331), (0.02, 0.02): (0.6904, 0.0255), (0.02, 0.04): (0.7003, 0.0168), (0.02, 0.06): (0.7018, 0.0050),
    (0.03, 0.0): (0.6979, 0.0288), (0.03, 0.02): (0.7141, 0.0233), (0.03, 0.04): (0.7171, 0.0154), (0.03, 0.06): (0.7274, 0.0048),
    (0.05, 0.0): (0.7506, 0.0197), (0.05, 0.02): (0.7662, 0.0166), (0.05, 0.04): (0.7690, 0.0119),
}

SWEEP_X: float = 0.05
SWEEP_Y: float = 0.01
HIGH_CONFIDENCE_COUNTS: Tuple[int, ...] = (5, 10, 5, 5, 5)
SWEEP_FIRST_COUNTS: Tuple[int, ...] = (5, 6, 7, 8, 9, 10)
# PCS(1), PCS(2), PCS(5)
HIGH_CONFIDENCE_REFERENCE: Tuple[float, float, float] = (0.6010, 0.1913, 0.0512)
LOW_CONFIDENCE_REFERENCE: Dict[int, Tuple[float, float, float]] = {
    5: (0.2900, 0.3168, 0.1042), 6: (0.2762, 0.3113, 0.1074), 7: (0.2672, 0.3068, 0.1122),
    8: (0.2580, 0.3036, 0.1179), 9: (0.2516, 0.3005, 0.1205), 10: (0.2461, 0.2976, 0.1198),
}


@dataclass(frozen=True)
class Fixture_Setting:
    """
        One parameter setting: a problem plus the per-alternative sample counts the sample means are based on
    """
    label: str
    problem: Problem_Spec
    counts: np.ndarray


def fixture_covariance(x: float, y: float) -> np.ndarray:
    """
    Alternative 1 covaries x with every other; 2, 3 and 4 covary 0.01 with each other; 5 covaries y with 2, 3 and 4
    :param x: covariance of alternative 1 with the rest
    :param y: covariance of alternative 5 with alternatives 2-4
    :return: 5 x 5 covariance
    """
    covariance = np.full((5, 5), PEER_COVARIANCE)
    covariance[0, :] = covariance[:, 0] = x
    covariance[4, 1:4] = covariance[1:4, 4] = y
    np.fill_diagonal(covariance, FIXTURE_VARIANCE)
    return covariance


def fixture_problem(x: float, y: float, means: Tuple[float, ...] = FIXTURE_MEANS) -> Problem_Spec:
    """
    :param x: covariance of alternative 1 with the rest
    :param y: covariance of alternative 5 with alternatives 2-4
    :param means: true means
    :return: the five-alternative problem as a single cluster
    """
    return Problem_Spec(means, np.zeros(5, dtype=int), sigma=fixture_covariance(x, y), parameters={"x": x, "y": y})


def correlation_grid_settings() -> List[Fixture_Setting]:
    """
    :return: every positive definite (x, y) cell with 10 samples per alternative
    """
    return [Fixture_Setting(f"x={x},y={y}", fixture_problem(x, y), np.array(GRID_COUNTS))
            for x in GRID_X for y in GRID_Y if (x, y) != NOT_POSITIVE_DEFINITE_CELL]


def sample_size_settings() -> List[Fixture_Setting]:
    """
    :return: the high-confidence setting followed by the low-confidence settings for N1 = 5..10
    """
    settings = [Fixture_Setting("high,N1=5", fixture_problem(SWEEP_X, SWEEP_Y), np.array(HIGH_CONFIDENCE_COUNTS))]
    for first_count in SWEEP_FIRST_COUNTS:
        counts = np.array((first_count,) + HIGH_CONFIDENCE_COUNTS[1:])
        settings.append(Fixture_Setting(f"low,N1={first_count}", fixture_problem(SWEEP_X, SWEEP_Y, LOW_CONFIDENCE_MEANS), counts))
    return settings


FIXTURES = {
    "table1": correlation_grid_settings,
    "table2": sample_size_settings,
}
FIXTURE_ALIASES = {"correlation-grid": "table1", "sample-size": "table2"}


def resolve_fixture(name: str) -> str:
    """
    :param name: fixture id or its descriptive alias
    :return: the fixture id
    :raises KeyError: unknown fixture
    """
    name = FIXTURE_ALIASES.get(name, name)
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(list(FIXTURES) + list(FIXTURE_ALIASES))}")
    return name
