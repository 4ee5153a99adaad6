"""Library of stopping criteria for sequential allocation"""
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Callable, Dict, Iterable, Optional

from cluster_conquer.allocation.Gba_Trace import Gba_Iteration, Gba_Trace

DEFAULT_CAP_PER_ALTERNATIVE = 10 ** 4


def stop_at_precision(iteration: Gba_Iteration, alpha: float = 0.05, **_) -> bool:
    """
    :param iteration: last batch recorded
    :param alpha: error probability
    :param _: spare kwargs
    :return: true if the raw bound exceeds 1 - alpha
    """
    return iteration.bound_raw > 1.0 - alpha


def stop_at_budget(trace: Gba_Trace, budget: int, **_) -> bool:
    """
    :param trace: run so far
    :param budget: total samples allowed, initialization included
    :param _: spare kwargs
    :return: true if the budget is spent
    """
    return trace.total_samples >= budget


def stop_at_sample_cap(trace: Gba_Trace, cap_per_alternative: int = DEFAULT_CAP_PER_ALTERNATIVE, **_) -> bool:
    """
    :param trace: run so far
    :param cap_per_alternative: samples allowed per alternative on average
    :param _: spare kwargs
    :return: true if the run holds cap_per_alternative * p samples
    """
    return trace.total_samples >= cap_per_alternative * trace.store.p


def stop_if_any_criteria_met(iteration: Gba_Iteration, trace: Gba_Trace, criteria: Iterable[Callable], **_) -> bool:
    """
    :param iteration: last batch recorded
    :param trace: run so far
    :param criteria: iterable of stopping criteria functions to consider
    :param _: spare kwargs
    :return: stop if any criteria is met
    """
    for stop_criteria in criteria:
        if stop_criteria(iteration=iteration, trace=trace):
            return True
    return False


class Stopping_Mode(Enum):
    """
        Constraint that ends a sequential run
    """
    Fixed_Precision = "fixed_precision"
    Fixed_Budget = "fixed_budget"


@dataclass
class Stopping_Rule:
    """
        Exactly one mode is active; fixed precision also carries a hard sample cap reported as its own reason.
        The rule is checked after every batch against the raw bound
    """
    mode: Stopping_Mode
    alpha: Optional[float] = None
    budget: Optional[int] = None
    cap_per_alternative: int = DEFAULT_CAP_PER_ALTERNATIVE
    criteria: Dict[str, Callable] = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode is Stopping_Mode.Fixed_Precision:
            assert self.alpha is not None and 0 < self.alpha < 1, f"fixed precision needs alpha in (0, 1), got {self.alpha}"
            self.criteria = {"precision": partial(stop_at_precision, alpha=self.alpha),
                             "cap": partial(stop_at_sample_cap, cap_per_alternative=self.cap_per_alternative)}
        else:
            assert self.budget is not None and self.budget >= 0, f"fixed budget needs a nonnegative budget, got {self.budget}"
            self.criteria = {"budget": partial(stop_at_budget, budget=self.budget)}

    @staticmethod
    def fixed_precision(alpha: float, cap_per_alternative: int = DEFAULT_CAP_PER_ALTERNATIVE) -> "Stopping_Rule":
        """
        :return: rule stopping when the raw bound exceeds 1 - alpha
        """
        return Stopping_Rule(Stopping_Mode.Fixed_Precision, alpha=alpha, cap_per_alternative=cap_per_alternative)

    @staticmethod
    def fixed_budget(budget: int) -> "Stopping_Rule":
        """
        :return: rule stopping once budget samples are held
        """
        return Stopping_Rule(Stopping_Mode.Fixed_Budget, budget=budget)

    def remaining(self, trace: Gba_Trace) -> int:
        """
        :return: samples left before the budget or cap is reached
        """
        limit = self.budget if self.mode is Stopping_Mode.Fixed_Budget else self.cap_per_alternative * trace.store.p
        return max(0, limit - trace.total_samples)

    def should_stop(self, iteration: Gba_Iteration, trace: Gba_Trace) -> bool:
        """
        :return: True if any criterion of the active mode is met
        """
        return stop_if_any_criteria_met(iteration, trace, self.criteria.values())

    def reason(self, iteration: Gba_Iteration, trace: Gba_Trace) -> Optional[str]:
        """
        :return: name of the first criterion met, None to continue
        """
        for name, stop_criteria in self.criteria.items():
            if stop_criteria(iteration=iteration, trace=trace):
                return name
        return None
