"""Sufficient statistics of simulated observations: counts, running means and co-moments of full-vector replications"""
from typing import List, Optional, Sequence

import numpy as np
from sortedcontainers import SortedKeyList

from cluster_conquer.exceptions import Insufficient_Observations_Error


def _merge_moments(count_a, mean_a, m2_a, count_b, mean_b, m2_b):
    total = count_a + count_b
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(total > 0, count_b / np.maximum(total, 1), 0.0)
    delta = mean_b - mean_a
    mean = mean_a + delta * weight
    m2 = m2_a + m2_b + delta * delta * count_a * weight
    return total, mean, m2


class Sample_Store:
    """
        Per-alternative counts, means and sums of squared deviations, plus co-moments accrued only on full-vector replications
    """

    def __init__(self, p: int, track_comoments: bool = True):
        self.p: int = p
        self.track_comoments: bool = track_comoments
        self.counts: np.ndarray = np.zeros(p, dtype=np.int64)
        self._means: np.ndarray = np.zeros(p)
        self._m2: np.ndarray = np.zeros(p)
        self.full_count: int = 0
        self._full_means: np.ndarray = np.zeros(p)
        self._comoments: Optional[np.ndarray] = np.zeros((p, p)) if track_comoments else None
        self.full_batches: int = 0
        self.partial_batches: int = 0
        self.ranking: SortedKeyList = SortedKeyList(range(p), key=self._rank_key)

    @staticmethod
    def from_observations(observations: np.ndarray, track_comoments: bool = True) -> "Sample_Store":
        """
        :param observations: n x p matrix of full-vector replications
        :param track_comoments: accrue co-moments
        :return: a store holding the observations
        """
        observations = np.atleast_2d(observations)
        store = Sample_Store(observations.shape[1], track_comoments)
        return store.update(observations)

    def _rank_key(self, index: int):
        return (self._means[index] if self.counts[index] > 0 else -np.inf), -index

    def _remove_from_ranking(self, indices: Sequence[int]):
        for index in indices:
            self.ranking.discard(int(index))

    def _add_to_ranking(self, indices: Sequence[int]):
        for index in indices:
            self.ranking.add(int(index))

    def update(self, observations: np.ndarray, indices: Optional[Sequence[int]] = None) -> "Sample_Store":
        """
        Adds replications. Rows over all alternatives (indices None or all of 0..p-1 in order) also update the co-moments
        :param observations: n x len(indices) matrix, one row per replication
        :param indices: alternatives of the columns, all when None
        :return: this store
        """
        observations = np.atleast_2d(np.asarray(observations, dtype=float))
        index = np.arange(self.p) if indices is None else np.asarray(indices, dtype=int)
        assert observations.shape[1] == index.size, f"{observations.shape[1]} columns for {index.size} alternatives"
        if observations.shape[0] == 0:
            return self
        full_vector = index.size == self.p and np.array_equal(index, np.arange(self.p))
        n = observations.shape[0]
        batch_mean = observations.mean(axis=0)
        batch_m2 = ((observations - batch_mean) ** 2).sum(axis=0)
        self._remove_from_ranking(index)
        counts, means, m2 = _merge_moments(self.counts[index], self._means[index], self._m2[index], n, batch_mean, batch_m2)
        self.counts[index], self._means[index], self._m2[index] = counts, means, m2
        self._add_to_ranking(index)
        if full_vector:
            self.full_batches += 1
            centered = observations - batch_mean
            batch_comoments = centered.T @ centered if self.track_comoments else None
            self._merge_full(n, batch_mean, batch_comoments)
        else:
            self.partial_batches += 1
        return self

    def add(self, index: int, values: np.ndarray) -> "Sample_Store":
        """
        :param index: alternative observed
        :param values: its new observations
        :return: this store
        """
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        return self.update(values, [index]) if values.size else self

    def _merge_full(self, n: int, batch_mean: np.ndarray, batch_comoments: Optional[np.ndarray]):
        total = self.full_count + n
        delta = batch_mean - self._full_means
        if self.track_comoments:
            self._comoments = self._comoments + batch_comoments + np.outer(delta, delta) * self.full_count * n / total
        self._full_means = self._full_means + delta * n / total
        self.full_count = total

    def merge(self, other: "Sample_Store") -> "Sample_Store":
        """
        :param other: store over the same alternatives holding disjoint replications
        :return: a new store with the combined statistics
        """
        assert other.p == self.p, f"cannot merge stores over {self.p} and {other.p} alternatives"
        merged = self.snapshot()
        merged._remove_from_ranking(range(self.p))
        merged.counts, merged._means, merged._m2 = _merge_moments(self.counts, self._means, self._m2, other.counts, other._means, other._m2)
        merged.counts = merged.counts.astype(np.int64)
        merged._add_to_ranking(range(self.p))
        if other.full_count > 0:
            merged.track_comoments = self.track_comoments and other.track_comoments
            merged._merge_full(other.full_count, other._full_means, other._comoments if merged.track_comoments else None)
        merged.full_batches += other.full_batches
        merged.partial_batches += other.partial_batches
        return merged

    def snapshot(self) -> "Sample_Store":
        """
        :return: an independent copy of the statistics
        """
        copy = Sample_Store.__new__(Sample_Store)
        copy.p = self.p
        copy.track_comoments = self.track_comoments
        copy.counts = self.counts.copy()
        copy._means = self._means.copy()
        copy._m2 = self._m2.copy()
        copy.full_count = self.full_count
        copy._full_means = self._full_means.copy()
        copy._comoments = None if self._comoments is None else self._comoments.copy()
        copy.full_batches = self.full_batches
        copy.partial_batches = self.partial_batches
        copy.ranking = SortedKeyList(range(self.p), key=copy._rank_key)
        return copy

    def _require(self, minimum: int):
        if self.counts.min(initial=minimum) < minimum:
            short = int(np.argmin(self.counts))
            raise Insufficient_Observations_Error(f"alternative {short} has {self.counts[short]} observations, {minimum} required")

    @property
    def total_samples(self) -> int:
        """
        :return: observations held over all alternatives
        """
        return int(self.counts.sum())

    @property
    def means(self) -> np.ndarray:
        """
        :return: sample mean of each alternative
        """
        self._require(2)
        return self._means.copy()

    @property
    def variances(self) -> np.ndarray:
        """
        :return: unbiased sample variance of each alternative
        """
        self._require(2)
        return self._m2 / (self.counts - 1)

    def full_vector_covariance(self) -> np.ndarray:
        """
        :return: unbiased covariance over the full-vector replications
        """
        if self.full_count < 2:
            raise Insufficient_Observations_Error(f"{self.full_count} full-vector replications, at least 2 required for a covariance")
        if not self.track_comoments:
            raise Insufficient_Observations_Error("co-moments are not tracked by this store")
        return self._comoments / (self.full_count - 1)

    def plug_in_covariance(self, correlation: np.ndarray) -> np.ndarray:
        """
        :param correlation: correlation estimate of the alternatives
        :return: covariance combining the correlation with standard deviations from all observations
        """
        deviations = np.sqrt(np.maximum(self.variances, 0.0))
        return correlation * np.outer(deviations, deviations)

    def best_mean_index(self) -> int:
        """
        :return: alternative with the largest sample mean, lowest index on ties
        """
        return int(self.ranking[-1])

    def alternatives_above(self, index: int) -> List[int]:
        """
        :param index: reference alternative
        :return: alternatives whose sample mean is strictly larger
        """
        position = self.ranking.bisect_key_right((self._means[index], np.inf))
        return sorted(int(i) for i in self.ranking.islice(position))
