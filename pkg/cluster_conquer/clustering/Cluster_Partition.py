"""Cluster label assignment of alternatives with optional prototypes, and label matching against a reference partition"""
import itertools
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from cluster_conquer.exceptions import Clustering_Error

EXHAUSTIVE_MATCH_LIMIT = 8


class Provenance(Enum):
    """
        Source of a partition
    """
    Linkage = "linkage"
    Few_Shot = "few_shot"
    Truth = "truth"
    Random = "random"
    Single = "single"


class Cluster_Partition:
    """
        Labels 0..k-1 for every alternative; prototype j, when present, is a member of cluster j
    """

    def __init__(self, labels: Sequence[int], prototypes: Optional[Sequence[int]] = None, provenance: Provenance = Provenance.Truth,
                 sample_cost: Optional[Dict[str, int]] = None, support: Optional[Sequence[int]] = None):
        self.labels: np.ndarray = np.asarray(labels, dtype=int)
        self.prototypes: Optional[List[int]] = None if prototypes is None else [int(t) for t in prototypes]
        self.provenance: Provenance = provenance
        self.sample_cost: Dict[str, int] = {} if sample_cost is None else dict(sample_cost)
        self.support: Optional[np.ndarray] = None if support is None else np.asarray(support, dtype=int)
        used = np.unique(self.labels)
        if used.size == 0 or used[0] != 0 or used[-1] != used.size - 1:
            raise Clustering_Error(f"labels must use every value in 0..k-1, found {used.tolist()}")
        if self.prototypes is not None:
            assert len(self.prototypes) == self.k, f"{len(self.prototypes)} prototypes for {self.k} clusters"
            for label, prototype in enumerate(self.prototypes):
                assert self.labels[prototype] == label, f"prototype {prototype} is not in cluster {label}"

    @staticmethod
    def from_problem(problem) -> "Cluster_Partition":
        """
        :param problem: a Problem_Spec
        :return: the true partition
        """
        return Cluster_Partition(problem.partition, provenance=Provenance.Truth)

    @property
    def p(self) -> int:
        """
        :return: number of alternatives
        """
        return self.labels.size

    @property
    def k(self) -> int:
        """
        :return: number of clusters
        """
        return int(self.labels.max()) + 1

    @property
    def sizes(self) -> np.ndarray:
        """
        :return: size of every cluster
        """
        return np.bincount(self.labels, minlength=self.k)

    @property
    def total_sample_cost(self) -> int:
        """
        :return: simulated observations spent producing the partition
        """
        return int(sum(self.sample_cost.values()))

    def members(self, label: int) -> np.ndarray:
        """
        :param label: cluster label
        :return: indices in the cluster, ascending
        """
        return np.flatnonzero(self.labels == label)

    def contingency(self, other: "Cluster_Partition") -> np.ndarray:
        """
        :param other: partition of the same alternatives
        :return: k x other.k matrix counting alternatives in each pair of clusters
        """
        table = np.zeros((self.k, other.k), dtype=int)
        np.add.at(table, (self.labels, other.labels), 1)
        return table

    def equals(self, other: "Cluster_Partition") -> bool:
        """
        :param other: partition of the same alternatives
        :return: True if the two partitions agree up to a relabeling
        """
        return self.p == other.p and self.k == other.k and match_labels(self, other).exact

    def to_dict(self) -> Dict[str, Any]:
        """
        :return: JSON-ready document
        """
        return {"labels": self.labels.tolist(), "prototypes": self.prototypes, "provenance": self.provenance.value,
                "sample_cost": self.sample_cost, "support": None if self.support is None else self.support.tolist()}

    @staticmethod
    def from_dict(document: Dict[str, Any]) -> "Cluster_Partition":
        """
        :param document: a document produced by to_dict
        :return: the partition
        """
        return Cluster_Partition(document["labels"], document.get("prototypes"), Provenance(document.get("provenance", "truth")),
                                 document.get("sample_cost"), document.get("support"))

    def to_json(self, path: Union[str, Path]):
        """
        :param path: file to write
        """
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @staticmethod
    def from_json(path: Union[str, Path]) -> "Cluster_Partition":
        """
        :param path: file written by to_json
        :return: the partition
        """
        return Cluster_Partition.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class Label_Match(NamedTuple):
    """
        Best mapping of estimated labels to reference labels
    """
    mapping: Dict[int, int]
    accuracy: float
    exact: bool


def match_labels(estimated: Cluster_Partition, reference: Cluster_Partition) -> Label_Match:
    """
    Exhaustive search over label permutations when both have the same k <= 8, greedy maximum overlap otherwise
    :param estimated: partition to relabel
    :param reference: partition to match
    :return: the mapping, the fraction of alternatives it places correctly and whether that fraction is 1
    """
    assert estimated.p == reference.p, "partitions cover different alternatives"
    table = estimated.contingency(reference)
    if estimated.k == reference.k and estimated.k <= EXHAUSTIVE_MATCH_LIMIT:
        permutations = np.array(list(itertools.permutations(range(reference.k))))
        scores = table[np.arange(estimated.k), permutations].sum(axis=1)
        best = permutations[int(np.argmax(scores))]
        mapping = {label: int(best[label]) for label in range(estimated.k)}
    else:
        mapping = {}
        remaining = table.astype(float)
        for _ in range(min(estimated.k, reference.k)):
            row, column = np.unravel_index(int(np.argmax(remaining)), remaining.shape)
            mapping[int(row)] = int(column)
            remaining[row, :] = -1.0
            remaining[:, column] = -1.0
    correct = sum(table[label, target] for label, target in mapping.items())
    accuracy = correct / estimated.p
    return Label_Match(mapping, float(accuracy), bool(correct == estimated.p))
