"""Fisher z transform and the variance of differences of dependent transformed correlations"""
from typing import Union

import numpy as np

from cluster_conquer.exceptions import Domain_Error

Real = Union[float, np.ndarray]


def _check_open_interval(name: str, value: Real):
    if np.any(np.abs(value) >= 1.0) or np.any(np.isnan(value)):
        raise Domain_Error(f"{name} must lie in (-1, 1)")


def fisher_z(r: Real) -> Real:
    """
    :param r: correlation(s) in (-1, 1)
    :return: 0.5 * ln((1 + r) / (1 - r))
    """
    _check_open_interval("r", r)
    z = np.arctanh(r)
    return float(z) if np.ndim(z) == 0 else z


def meng_term(r_ab: Real, r_bc: Real) -> Real:
    """
    :param r_ab: correlation of the shared pair
    :param r_bc: correlation between the two non-shared alternatives
    :return: (1 - r_bc) * h, with f capped at 1
    """
    mean_square = (np.square(r_ab) + np.square(r_bc)) / 2.0
    f = np.minimum((1.0 - r_bc) / (2.0 * (1.0 - mean_square)), 1.0)
    h = (1.0 - f * mean_square) / (1.0 - mean_square)
    return (1.0 - r_bc) * h


def meng_variance(r_ab: Real, r_ac: Real, r_bc: Real, n: int) -> Real:
    """
    Variance of z(r_ab) - z(r_ac) for correlations estimated from the same n replications
    :param r_ab: correlation of a with b
    :param r_ac: correlation of a with c
    :param r_bc: correlation of b with c
    :param n: replications behind the estimates
    :return: 2 (1 - r_bc) h / (n - 3)
    """
    if n <= 3:
        raise Domain_Error(f"n must exceed 3, got {n}")
    for name, value in (("r_ab", r_ab), ("r_ac", r_ac), ("r_bc", r_bc)):
        _check_open_interval(name, value)
    variance = 2.0 * meng_term(r_ab, r_bc) / (n - 3)
    return float(variance) if np.ndim(variance) == 0 else variance
