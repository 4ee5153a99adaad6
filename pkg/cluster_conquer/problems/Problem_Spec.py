"""Ground-truth ranking and selection problem: means, covariance structure and true cluster partition"""
import json
import logging
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from cluster_conquer.exceptions import Problem_Construction_Error
from cluster_conquer.problems.simulation import symmetric_factor

logger = logging.getLogger(__name__)

_PSD_TOLERANCE = 1e-10
_TIE_GAP = 1e-12
_DENSE_LIMIT = 20000


class Model_Kind(Enum):
    """
        Generator family of a problem
    """
    Explicit = "explicit"
    Block = "block"
    Free_Wilson = "free_wilson"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


class Problem_Spec:
    """
        Immutable R&S instance. The covariance is either a dense matrix or a loading matrix plus a common idiosyncratic variance
    """

    def __init__(self, mu: Sequence[float], partition: Sequence[int],
                 sigma: Optional[np.ndarray] = None,
                 loadings: Optional[np.ndarray] = None, idiosyncratic_var: float = 0.0,
                 model_kind: Model_Kind = Model_Kind.Explicit, parameters: Optional[Dict[str, Any]] = None,
                 check_psd: bool = True):
        assert (sigma is None) != (loadings is None), "exactly one of sigma or loadings must be given"
        self.mu: np.ndarray = _frozen(mu)
        self.model_kind: Model_Kind = model_kind
        self.parameters: Dict[str, Any] = {} if parameters is None else dict(parameters)
        self._sigma: Optional[np.ndarray] = None if sigma is None else _frozen(sigma)
        self._loadings: Optional[np.ndarray] = None if loadings is None else _frozen(loadings)
        self.idiosyncratic_var: float = float(idiosyncratic_var)
        labels = np.asarray(partition, dtype=int)
        labels.setflags(write=False)
        self.partition: np.ndarray = labels
        self._validate(check_psd)
        if self.ambiguous_best:
            logger.warning(f"best alternative {self.best_index} is within {_TIE_GAP} of the runner up")

    def _validate(self, check_psd: bool):
        p = self.p
        if self.partition.shape != (p,):
            raise Problem_Construction_Error(f"partition has {self.partition.size} labels for {p} alternatives")
        if p == 0:
            raise Problem_Construction_Error("a problem needs at least one alternative")
        used = np.unique(self.partition)
        if used[0] != 0 or used[-1] != len(used) - 1:
            raise Problem_Construction_Error(f"partition labels must cover 0..k-1, found {used.tolist()}")
        if self._sigma is not None:
            if self._sigma.shape != (p, p):
                raise Problem_Construction_Error(f"sigma has shape {self._sigma.shape} for {p} alternatives")
            if not np.allclose(self._sigma, self._sigma.T, atol=1e-12):
                raise Problem_Construction_Error("sigma is not symmetric")
        else:
            if self._loadings.shape[0] != p:
                raise Problem_Construction_Error(f"loadings have {self._loadings.shape[0]} rows for {p} alternatives")
            if self.idiosyncratic_var < 0:
                raise Problem_Construction_Error("idiosyncratic variance must be nonnegative")
        if check_psd:
            low, high = self.eigenvalue_range
            if low < -_PSD_TOLERANCE * max(high, 0.0):
                raise Problem_Construction_Error(f"covariance is not positive semi-definite (min eigenvalue {low:.3e})", self.parameters)

    @property
    def p(self) -> int:
        """
        :return: number of alternatives
        """
        return self.mu.size

    @property
    def k(self) -> int:
        """
        :return: number of true clusters
        """
        return int(self.partition.max()) + 1

    @property
    def best_index(self) -> int:
        """
        :return: index of the largest true mean, lowest index on ties
        """
        return int(np.argmax(self.mu))

    @property
    def ambiguous_best(self) -> bool:
        """
        :return: True if the top two means are closer than 1e-12
        """
        if self.p < 2:
            return False
        top = np.sort(self.mu)[-2:]
        return bool(top[1] - top[0] < _TIE_GAP)

    @property
    def is_factor_model(self) -> bool:
        """
        :return: True if the covariance is held as loadings plus idiosyncratic variance
        """
        return self._loadings is not None

    @property
    def variances(self) -> np.ndarray:
        """
        :return: variance of each alternative
        """
        if self._sigma is not None:
            return np.diag(self._sigma).copy()
        return np.einsum("ij,ij->i", self._loadings, self._loadings) + self.idiosyncratic_var

    def covariance(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        :param indices: alternatives to include, all when None
        :return: the covariance submatrix over indices
        """
        if self._sigma is not None:
            if indices is None:
                return np.array(self._sigma)
            index = np.asarray(indices, dtype=int)
            return self._sigma[np.ix_(index, index)]
        rows = self._loadings if indices is None else self._loadings[np.asarray(indices, dtype=int)]
        if rows.shape[0] > _DENSE_LIMIT:
            raise MemoryError(f"refusing to materialize a dense {rows.shape[0]}x{rows.shape[0]} covariance; use a scope")
        return rows @ rows.T + self.idiosyncratic_var * np.eye(rows.shape[0])

    @property
    def sigma(self) -> np.ndarray:
        """
        :return: the dense covariance matrix
        """
        return self.covariance()

    def correlation(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        :param indices: alternatives to include, all when None
        :return: the correlation submatrix over indices
        """
        covariance = self.covariance(indices)
        scale = np.sqrt(np.maximum(np.diag(covariance), 1e-15))
        correlation = np.clip(covariance / np.outer(scale, scale), -1.0, 1.0)
        np.fill_diagonal(correlation, 1.0)
        return correlation

    @cached_property
    def _full_factor(self) -> np.ndarray:
        return self._scope_factor(None)

    def _scope_factor(self, indices: Optional[np.ndarray]) -> np.ndarray:
        if self._sigma is not None:
            return symmetric_factor(self.covariance(indices))
        rows = self._loadings if indices is None else self._loadings[indices]
        if self.idiosyncratic_var == 0:
            return np.array(rows)
        return np.hstack([rows, np.sqrt(self.idiosyncratic_var) * np.eye(rows.shape[0])])

    def factor(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        :param indices: alternatives to include, all when None
        :return: F with F @ F.T equal to the covariance over indices
        """
        if indices is None:
            return self._full_factor
        return self._scope_factor(np.asarray(indices, dtype=int))

    def draw(self, rng: np.random.Generator, n: int, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        :param rng: generator to draw from
        :param n: number of replications
        :param indices: alternatives to draw, all when None
        :return: n x len(indices) matrix of i.i.d. rows
        """
        index = None if indices is None else np.asarray(indices, dtype=int)
        means = self.mu if index is None else self.mu[index]
        if self._sigma is not None:
            factor = self.factor(index)
            return means + rng.standard_normal((n, factor.shape[1])) @ factor.T
        rows = self._loadings if index is None else self._loadings[index]
        common = rng.standard_normal((n, rows.shape[1])) @ rows.T
        return means + common + np.sqrt(self.idiosyncratic_var) * rng.standard_normal((n, rows.shape[0]))

    @cached_property
    def eigenvalue_range(self) -> Tuple[float, float]:
        """
        :return: smallest and largest eigenvalue of the covariance
        """
        if self._sigma is not None:
            eigenvalues = np.linalg.eigvalsh(self._sigma)
            return float(eigenvalues[0]), float(eigenvalues[-1])
        # nonzero spectrum of L L^T equals that of the small Gram matrix L^T L
        gram_eigenvalues = np.linalg.eigvalsh(self._loadings.T @ self._loadings)
        high = float(gram_eigenvalues[-1]) + self.idiosyncratic_var
        if self.p > gram_eigenvalues.size:
            low = self.idiosyncratic_var
        else:
            low = float(gram_eigenvalues[gram_eigenvalues.size - self.p]) + self.idiosyncratic_var
        return low, high

    def satisfies_assumption_one(self) -> bool:
        """
        :return: True if every intra-cluster correlation strictly exceeds every inter-cluster correlation
        """
        if self.k == 1 or self.k == self.p:
            return True
        correlation = self.correlation()
        same = self.partition[:, None] == self.partition[None, :]
        off_diagonal = ~np.eye(self.p, dtype=bool)
        intra = correlation[same & off_diagonal]
        inter = correlation[~same]
        if intra.size == 0:
            return True
        return bool(intra.min() > inter.max())

    def members(self, label: int) -> np.ndarray:
        """
        :param label: cluster label
        :return: indices of the alternatives in the cluster
        """
        return np.flatnonzero(self.partition == label)

    def to_dict(self) -> Dict[str, Any]:
        """
        :return: JSON-ready document: model kind, parameters and frozen means
        """
        document: Dict[str, Any] = {"model": self.model_kind.value, "parameters": self.parameters, "mu": self.mu.tolist(), "partition": self.partition.tolist()}
        if self.model_kind is Model_Kind.Explicit:
            if self._sigma is not None:
                document["sigma"] = self._sigma.tolist()
            else:
                document["loadings"] = self._loadings.tolist()
                document["idiosyncratic_var"] = self.idiosyncratic_var
        return document

    @staticmethod
    def from_dict(document: Dict[str, Any]) -> "Problem_Spec":
        """
        :param document: a document produced by to_dict
        :return: the reconstructed problem
        """
        from cluster_conquer.problems.problem_builders import problem_from_parameters
        kind = Model_Kind(document["model"])
        if kind is Model_Kind.Explicit:
            if "sigma" in document:
                return Problem_Spec(document["mu"], document["partition"], sigma=np.asarray(document["sigma"]), parameters=document.get("parameters"))
            return Problem_Spec(document["mu"], document["partition"], loadings=np.asarray(document["loadings"]),
                                idiosyncratic_var=document["idiosyncratic_var"], parameters=document.get("parameters"))
        return problem_from_parameters(kind, document["parameters"])

    def to_json(self, path: Union[str, Path]):
        """
        :param path: file to write
        """
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @staticmethod
    def from_json(path: Union[str, Path]) -> "Problem_Spec":
        """
        :param path: file written by to_json
        :return: the problem
        """
        return Problem_Spec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def __repr__(self):
        return f"Problem_Spec({self.model_kind.value}, p={self.p}, k={self.k}, best={self.best_index})"
