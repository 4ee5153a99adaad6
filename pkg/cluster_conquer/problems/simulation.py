"""Seed splitting, covariance factorization and correlated normal observation streams"""
import logging
from collections import OrderedDict
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.linalg

from cluster_conquer.exceptions import Factorization_Error

if TYPE_CHECKING:
    from cluster_conquer.problems.Problem_Spec import Problem_Spec

logger = logging.getLogger(__name__)

_MASK_64 = (1 << 64) - 1
_JITTER_STEPS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)


def derive_seed(root: int, index: int) -> int:
    """
    SplitMix64 finalizer applied to root XOR index
    :param root: root seed
    :param index: index of the worker, stage or replication the seed is for
    :return: a 64-bit seed
    """
    z = (((int(root) & _MASK_64) ^ (int(index) & _MASK_64)) + 0x9E3779B97F4A7C15) & _MASK_64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK_64
    return z ^ (z >> 31)


def symmetric_factor(matrix: np.ndarray) -> np.ndarray:
    """
    Lower-triangular F with F @ F.T equal to matrix, escalating diagonal jitter from 1e-12 to 1e-8 (relative to the mean variance) before failing
    :param matrix: symmetric positive semi-definite matrix
    :return: the factor
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    matrix = (matrix + matrix.T) / 2.0
    if not np.any(matrix):
        return np.zeros_like(matrix)
    scale = max(float(np.mean(np.abs(np.diag(matrix)))), np.finfo(float).tiny)
    identity = np.eye(matrix.shape[0])
    for jitter in _JITTER_STEPS:
        try:
            factor = scipy.linalg.cholesky(matrix + jitter * scale * identity, lower=True)
        except np.linalg.LinAlgError:
            continue
        if jitter > 0:
            logger.warning(f"covariance factorization needed diagonal jitter {jitter:.0e} x {scale:.3e}")
        return factor
    raise Factorization_Error(f"matrix of size {matrix.shape[0]} is not positive semi-definite; smallest eigenvalue {np.linalg.eigvalsh(matrix)[0]:.3e}")


def simulate(spec: "Problem_Spec", n: int, seed: int, indices: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    :param spec: problem to draw from
    :param n: number of replications
    :param seed: generator seed
    :param indices: alternatives to draw, all when None
    :return: n x p matrix of i.i.d. rows from N(mu, sigma) restricted to indices
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return spec.draw(np.random.default_rng(seed), n, indices)


class Replication_Stream:
    """
        Deterministic source of replications for a scope of alternatives.
        Replication m of every alternative comes from row m of the same latent block, so observations that share a replication index are jointly normal and different replications are independent.
    """

    def __init__(self, spec: "Problem_Spec", indices: Optional[Sequence[int]], seed: int, block_rows: int = 256,
                 cached_blocks: int = 4):
        self.indices: np.ndarray = np.arange(spec.p) if indices is None else np.asarray(indices, dtype=int)
        self.seed: int = seed
        self.block_rows: int = block_rows
        self.means: np.ndarray = spec.mu[self.indices]
        self.factor: np.ndarray = spec.factor(None if indices is None else self.indices)
        self.cached_blocks: int = cached_blocks
        # least recently used first; an evicted block is redrawn identically from its own seed
        self._blocks: "OrderedDict[int, np.ndarray]" = OrderedDict()
        self.samples_drawn: int = 0

    @property
    def p(self) -> int:
        """
        :return: number of alternatives in the scope
        """
        return len(self.indices)

    def _latent_rows(self, start: int, count: int) -> np.ndarray:
        rows: List[np.ndarray] = []
        first_block, last_block = start // self.block_rows, (start + count - 1) // self.block_rows
        for block in range(first_block, last_block + 1):
            rows.append(self._slice(self._block(block), block, start, count))
        return np.vstack(rows)

    def _block(self, block: int) -> np.ndarray:
        if block in self._blocks:
            self._blocks.move_to_end(block)
            return self._blocks[block]
        rng = np.random.default_rng(derive_seed(self.seed, block))
        latent = rng.standard_normal((self.block_rows, self.factor.shape[1]))
        self._blocks[block] = latent
        while len(self._blocks) > self.cached_blocks:
            self._blocks.popitem(last=False)
        return latent

    def _slice(self, latent: np.ndarray, block: int, start: int, count: int) -> np.ndarray:
        block_start = block * self.block_rows
        low = max(start, block_start) - block_start
        high = min(start + count, block_start + self.block_rows) - block_start
        return latent[low:high]

    @property
    def cached_block_ids(self) -> List[int]:
        """
        :return: ids of the latent blocks held in memory, least recently used first
        """
        return list(self._blocks)

    def observations(self, local_index: int, start: int, count: int) -> np.ndarray:
        """
        :param local_index: position of the alternative in the scope
        :param start: first replication number
        :param count: number of replications
        :return: the alternative's observations for replications start..start+count-1
        """
        if count <= 0:
            return np.empty(0)
        self.samples_drawn += count
        return self.means[local_index] + self._latent_rows(start, count) @ self.factor[local_index]

    def full_rows(self, start: int, count: int, replay: bool = False) -> np.ndarray:
        """
        :param start: first replication number
        :param count: number of replications
        :param replay: rows were drawn before, so they are not counted again
        :return: count x p matrix of full-vector replications
        """
        if count <= 0:
            return np.empty((0, self.p))
        if not replay:
            self.samples_drawn += count * self.p
        return self.means + self._latent_rows(start, count) @ self.factor.T


def export_observations_csv(observations: np.ndarray, path, indices: Optional[Sequence[int]] = None):
    """
    Writes observations with a header row of alternative indices
    :param observations: n x p matrix
    :param path: output file
    :param indices: alternative indices of the columns
    """
    columns = range(observations.shape[1]) if indices is None else indices
    pd.DataFrame(observations, columns=[str(i) for i in columns]).to_csv(path, index=False)
