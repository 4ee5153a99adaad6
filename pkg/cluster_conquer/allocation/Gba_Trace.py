"""Per-batch records of a sequential allocation run and the run summary"""
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from cluster_conquer.allocation.selection_history_graph import Selection_History
from cluster_conquer.selection.Selection_Result import Selection_Result
from cluster_conquer.statistics.Sample_Store import Sample_Store


@dataclass
class Gba_Iteration:
    """
        One batch: the branch taken, then the candidate and raw bound evaluated after simulating, and the running total.
        Iteration 0 is the evaluation after initialization
    """
    iteration: int
    tau_star: int
    case: str
    bound_raw: float
    cumulative_samples: int
    batch_size: int
    zero_fraction: float


class Gba_Trace:
    """
        Record of a sequential run over a scope of alternatives; indices of tau_star and selected are positions in the scope
    """

    def __init__(self, scope: np.ndarray, store: Sample_Store, initial_samples: int = 0):
        self.scope: np.ndarray = np.asarray(scope, dtype=int)
        self.store: Sample_Store = store
        self.iterations: List[Gba_Iteration] = []
        self.history: Selection_History = Selection_History()
        self.final: Optional[Selection_Result] = None
        self.selected: Optional[int] = None
        self.stop_reason: Optional[str] = None
        self.new_samples: int = 0
        self.initial_samples: int = initial_samples

    @property
    def iteration_count(self) -> int:
        """
        :return: number of batches recorded
        """
        return len(self.iterations)

    @property
    def total_samples(self) -> int:
        """
        :return: observations in the store, including any it was initialized with
        """
        return self.store.total_samples

    @property
    def selected_index(self) -> Optional[int]:
        """
        :return: the selected alternative as an index of the whole problem
        """
        return None if self.selected is None else int(self.scope[self.selected])

    @property
    def bound_series(self) -> np.ndarray:
        """
        :return: raw bound after every batch
        """
        return np.array([record.bound_raw for record in self.iterations])

    def record(self, iteration: Gba_Iteration):
        """
        Adds a batch record and tracks candidate switches
        :param iteration: the record
        """
        if self.iterations:
            self.history.add_switch(self.iterations[-1], iteration)
        else:
            self.history.add_candidate(iteration.tau_star)
        self.iterations.append(iteration)

    def summary(self) -> Dict[str, Any]:
        """
        :return: JSON-ready run summary
        """
        return {"selected": self.selected_index, "stop_reason": self.stop_reason, "total_samples": self.total_samples,
                "new_samples": self.new_samples, "iterations": self.iteration_count,
                "mopcs": None if self.final is None else self.final.mopcs, "switches": self.history.switch_count}

    def to_jsonl(self, path: Union[str, Path]):
        """
        Writes one JSON record per batch
        :param path: file to write
        """
        with Path(path).open("w", encoding="utf-8") as file:
            for record in self.iterations:
                file.write(json.dumps(asdict(record)) + "\n")
