"""Ledger of one procedure run: stage sample totals, local bests, timings and the final selection"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from cluster_conquer.clustering.Cluster_Partition import Cluster_Partition

STAGES = ("stage0", "clustering", "stage2", "stage3")


@dataclass
class Run_Record:
    """
        Every simulated observation is counted in exactly one stage; local bests are listed in cluster-index order
    """
    procedure: str
    selected: int
    best_index: int
    partition: Cluster_Partition
    local_bests: List[int] = field(default_factory=list)
    stage_samples: Dict[str, int] = field(default_factory=lambda: {stage: 0 for stage in STAGES})
    stage_seconds: Dict[str, float] = field(default_factory=lambda: {stage: 0.0 for stage in STAGES})
    stage2_bounds: List[Optional[float]] = field(default_factory=list)
    stage3_bound: Optional[float] = None
    stop_reasons: List[Optional[str]] = field(default_factory=list)

    @property
    def correct(self) -> bool:
        """
        :return: True if the selection is the true best
        """
        return self.selected == self.best_index

    @property
    def total_samples(self) -> int:
        """
        :return: sum of the stage totals
        """
        return int(sum(self.stage_samples.values()))

    @property
    def wall_time(self) -> float:
        """
        :return: seconds over all stages
        """
        return float(sum(self.stage_seconds.values()))

    @property
    def weighted_stage2_bound(self) -> Optional[float]:
        """
        :return: clamped stage-2 bounds averaged with cluster sizes as weights; clusters without a bound count as certain
        """
        if not self.stage2_bounds:
            return None
        bounds = np.array([1.0 if b is None else min(max(b, 0.0), 1.0) for b in self.stage2_bounds])
        return float(np.average(bounds, weights=self.partition.sizes))

    @property
    def final_bound(self) -> Optional[float]:
        """
        :return: clamped bound of the stage that produced the selection
        """
        if self.stage3_bound is not None:
            return min(max(self.stage3_bound, 0.0), 1.0)
        return self.weighted_stage2_bound

    def to_row(self) -> Dict[str, Any]:
        """
        :return: flat summary for tabular output
        """
        row = {"procedure": self.procedure, "p": self.partition.p, "k": self.partition.k, "selected": self.selected,
               "correct": self.correct, "total_samples": self.total_samples, "final_bound": self.final_bound,
               "stage2_weighted_bound": self.weighted_stage2_bound, "stage3_bound": self.stage3_bound, "wall_time": self.wall_time}
        row.update({f"{stage}_samples": count for stage, count in self.stage_samples.items()})
        return row

    def to_dict(self) -> Dict[str, Any]:
        """
        :return: JSON-ready record including the partition and local bests
        """
        return {**self.to_row(), "local_bests": self.local_bests, "stage_seconds": self.stage_seconds,
                "stage2_bounds": self.stage2_bounds, "stop_reasons": self.stop_reasons, "partition": self.partition.to_dict()}
