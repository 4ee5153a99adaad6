"""Integer sample counts for one batch of a budget allocation"""
from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np


class Allocation_Case(Enum):
    """
        Branch of the allocation policy that produced a plan
    """
    A = "a"
    B = "b"
    Equal = "equal"
    Rinott = "rinott-stage2"


def largest_remainder_round(fractional: Sequence[float], total: int) -> np.ndarray:
    """
    Floors every share and hands the leftover units to the largest remainders, lowest index first on ties
    :param fractional: nonnegative shares
    :param total: integer sum to preserve
    :return: integer counts summing to total
    """
    fractional = np.maximum(np.asarray(fractional, dtype=float), 0.0)
    if total == 0 or fractional.size == 0:
        return np.zeros(fractional.size, dtype=np.int64)
    if fractional.sum() <= 0:
        fractional = np.ones(fractional.size)
    scaled = fractional * (total / fractional.sum())
    counts = np.floor(scaled + 1e-12).astype(np.int64)
    leftover = int(total - counts.sum())
    if leftover > 0:
        remainders = scaled - counts
        order = np.lexsort((np.arange(fractional.size), -remainders))
        counts[order[:leftover]] += 1
    elif leftover < 0:
        order = np.lexsort((-np.arange(fractional.size), scaled - counts))
        for index in order:
            if leftover == 0:
                break
            if counts[index] > 0:
                counts[index] -= 1
                leftover += 1
    return counts


class Allocation_Plan:
    """
        Sample counts of every alternative in a scope for one batch.
        Fractional shares are kept alongside the rounded counts when the policy produces them
    """

    def __init__(self, counts: Sequence[int], batch_size: int, case: Allocation_Case, epsilon_floor: int = 0,
                 fractional: Optional[Sequence[float]] = None, tau: Optional[int] = None):
        self.counts: np.ndarray = np.asarray(counts, dtype=np.int64)
        self.batch_size: int = int(batch_size)
        self.case: Allocation_Case = case
        self.epsilon_floor: int = int(epsilon_floor)
        self.fractional: Optional[np.ndarray] = None if fractional is None else np.asarray(fractional, dtype=float)
        self.tau: Optional[int] = tau
        assert (self.counts >= 0).all(), f"negative counts in plan {self.counts.tolist()}"
        assert int(self.counts.sum()) == self.batch_size, f"plan sums to {int(self.counts.sum())}, batch size is {self.batch_size}"

    @property
    def p(self) -> int:
        """
        :return: number of alternatives in the scope
        """
        return self.counts.size

    @property
    def zero_fraction(self) -> float:
        """
        :return: fraction of alternatives receiving no samples
        """
        return float(np.mean(self.counts == 0)) if self.p else 0.0

    def to_dict(self) -> Dict[str, Any]:
        """
        :return: JSON-ready summary
        """
        return {"case": self.case.value, "batch_size": self.batch_size, "epsilon_floor": self.epsilon_floor,
                "tau": self.tau, "counts": self.counts.tolist()}
