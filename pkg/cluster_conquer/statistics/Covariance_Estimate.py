"""Sample and analytical nonlinear shrinkage covariance estimates"""
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from cluster_conquer.exceptions import Domain_Error, Insufficient_Observations_Error
from cluster_conquer.statistics.Sample_Store import Sample_Store

logger = logging.getLogger(__name__)

_ROOT_FIVE = np.sqrt(5.0)


class Covariance_Estimate:
    """
        Covariance matrix with the estimator that produced it
    """

    def __init__(self, method: "Covariance_Method", matrix: np.ndarray, n: int,
                 eigenvalues: Optional[np.ndarray] = None, eigenvectors: Optional[np.ndarray] = None,
                 shrunk_eigenvalues: Optional[np.ndarray] = None, metadata: Optional[Dict[str, Any]] = None):
        self.method: Covariance_Method = method
        self.matrix: np.ndarray = (matrix + matrix.T) / 2.0
        self.n: int = n
        self.eigenvalues: Optional[np.ndarray] = eigenvalues
        self.eigenvectors: Optional[np.ndarray] = eigenvectors
        self.shrunk_eigenvalues: Optional[np.ndarray] = shrunk_eigenvalues
        self.metadata: Dict[str, Any] = {} if metadata is None else metadata

    @property
    def p(self) -> int:
        """
        :return: dimension of the matrix
        """
        return self.matrix.shape[0]

    def correlation(self) -> np.ndarray:
        """
        :return: correlation matrix with unit diagonal and entries clipped to [-1, 1]
        """
        deviations = np.sqrt(np.maximum(np.diag(self.matrix), 1e-15))
        correlation = np.clip(self.matrix / np.outer(deviations, deviations), -1.0, 1.0)
        np.fill_diagonal(correlation, 1.0)
        return correlation

    def to_csv(self, path: Union[str, Path]):
        """
        :param path: output file, one row and column per alternative
        """
        labels = [str(i) for i in range(self.p)]
        pd.DataFrame(self.matrix, index=labels, columns=labels).to_csv(path)


def sample_covariance(store: Sample_Store) -> Covariance_Estimate:
    """
    :param store: statistics holding at least two full-vector replications
    :return: unbiased covariance over full-vector replications only
    """
    return Covariance_Estimate(Covariance_Method.Sample, store.full_vector_covariance(), store.full_count)


def shrink_eigenvalues(eigenvalues: np.ndarray, n: int) -> np.ndarray:
    """
    Nonlinear shrinkage of sample eigenvalues with an Epanechnikov kernel of bandwidth lambda_j n^(-1/3) and its Hilbert transform.
    Zero eigenvalues stay zero and are left out of the kernel sums.
    :param eigenvalues: sample covariance eigenvalues
    :param n: number of observations behind them
    :return: shrunk eigenvalues, clipped at 0
    """
    p = eigenvalues.size
    ratio = p / n
    positive = eigenvalues > np.finfo(float).eps * max(eigenvalues.max(), 0.0) * p
    support = eigenvalues[positive]
    bandwidth = support * n ** (-1.0 / 3.0)
    x = (eigenvalues[:, None] - support[None, :]) / bandwidth[None, :]
    density = (3.0 / (4.0 * _ROOT_FIVE) * np.maximum(1.0 - x ** 2 / 5.0, 0.0) / bandwidth).sum(axis=1) / p
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.log(np.abs((_ROOT_FIVE - x) / (_ROOT_FIVE + x)))
    log_term = np.where(np.isfinite(log_term), log_term, 0.0)
    hilbert_terms = -3.0 * x / (10.0 * np.pi) + 3.0 * (1.0 - x ** 2 / 5.0) / (4.0 * _ROOT_FIVE * np.pi) * log_term
    hilbert = (hilbert_terms / bandwidth).sum(axis=1) / p
    shrunk = eigenvalues / ((np.pi * ratio * eigenvalues * density) ** 2 + (1.0 - ratio - np.pi * ratio * eigenvalues * hilbert) ** 2)
    shrunk = np.where(positive, shrunk, 0.0)
    return np.maximum(shrunk, 0.0)


def shrinkage_from_sample(sample: np.ndarray, n: int) -> Covariance_Estimate:
    """
    :param sample: unbiased sample covariance
    :param n: number of observations behind it
    :return: shrinkage estimate keeping the sample eigenvectors
    """
    p = sample.shape[0]
    if n < 4:
        raise Insufficient_Observations_Error(f"shrinkage needs at least 4 observations, got {n}")
    if not np.any(sample):
        raise Domain_Error("sample covariance is identically zero")
    metadata = {"p_exceeds_n": p > n, "n": n, "p": p}
    if p > n:
        logger.warning(f"shrinkage estimate with p={p} > n={n}")
    if p == 1:
        return Covariance_Estimate(Covariance_Method.Shrinkage, np.array(sample, dtype=float), n,
                                   np.diag(sample).copy(), np.ones((1, 1)), np.diag(sample).copy(), metadata)
    eigenvalues, eigenvectors = np.linalg.eigh((sample + sample.T) / 2.0)
    eigenvalues = np.maximum(eigenvalues, 0.0)
    shrunk = shrink_eigenvalues(eigenvalues, n)
    matrix = (eigenvectors * shrunk) @ eigenvectors.T
    return Covariance_Estimate(Covariance_Method.Shrinkage, matrix, n, eigenvalues, eigenvectors, shrunk, metadata)


def shrinkage_covariance(store: Sample_Store) -> Covariance_Estimate:
    """
    :param store: statistics holding at least four full-vector replications
    :return: analytical nonlinear shrinkage estimate
    """
    return shrinkage_from_sample(store.full_vector_covariance(), store.full_count)


class Covariance_Method(Enum):
    """
        Covariance estimator choice; calling a member on a store runs the estimator
    """
    Sample = "sample"
    Shrinkage = "shrinkage"

    def __call__(self, store: Sample_Store) -> Covariance_Estimate:
        if self is Covariance_Method.Sample:
            return sample_covariance(store)
        return shrinkage_covariance(store)
