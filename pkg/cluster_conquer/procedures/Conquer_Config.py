"""Validated experiment configuration: problem, clustering and conquer parameters"""
import json
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from cluster_conquer.clustering.Clustering_Config import Clustering_Config
from cluster_conquer.exceptions import Configuration_Error, Problem_Construction_Error
from cluster_conquer.problems.Problem_Spec import Problem_Spec
from cluster_conquer.problems.fixtures import FIXTURE_MEANS, LOW_CONFIDENCE_MEANS, fixture_problem
from cluster_conquer.problems.problem_builders import (Block_Model_Spec, Free_Wilson_Spec, build_block_model, build_free_wilson,
                                                       desk_free_wilson_spec, full_free_wilson_spec)

ALPHA_TOLERANCE = 1e-12


class Engine(str, Enum):
    """
        Selection engine run inside a cluster or over the local bests
    """
    GBA = "gba"
    Equal = "equal"
    CBA = "cba"
    Rinott = "rinott"


class Budget_Mode(str, Enum):
    """
        Constraint ending the stage-2 and stage-3 runs
    """
    Fixed_Precision = "fixed_precision"
    Fixed_Budget = "fixed_budget"


class Conquer_Config(BaseModel):
    """
        Parameters of a clustering-and-conquer run; alpha1 guards the within-cluster stage and alpha2 the final stage
    """
    model_config = ConfigDict(extra="forbid")

    n0: int = Field(20, ge=2)
    alpha: float = Field(0.1, gt=0, lt=1)
    alpha1: float = Field(0.09, gt=0, lt=1)
    alpha2: float = Field(0.01, gt=0, lt=1)
    clustering: Clustering_Config = Field(default_factory=Clustering_Config)
    stage2_engine: Engine = Engine.GBA
    stage3_engine: Engine = Engine.GBA
    epsilon: float = Field(0.01, ge=0, lt=1)
    batch_multiplier: int = Field(2, ge=1)
    budget_mode: Budget_Mode = Budget_Mode.Fixed_Precision
    total_budget: Optional[int] = Field(None, ge=1)
    selection: str = Field("pos", pattern="^(pos|mean)$")
    pcs_method: str = Field("bonferroni", pattern="^(bonferroni|monte_carlo)$")
    mc_draws: int = Field(10 ** 4, ge=10 ** 4)
    indifference_zone: Optional[float] = Field(None, gt=0)
    rinott_delta: float = Field(0.1, gt=0)
    cap_per_alternative: int = Field(10 ** 4, ge=1)
    refresh_correlation: bool = False
    reuse_stage1_samples: bool = True
    workers: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_error_split(self):
        if abs(self.alpha1 + self.alpha2 - self.alpha) > ALPHA_TOLERANCE:
            raise ValueError(f"alpha1 + alpha2 = {self.alpha1 + self.alpha2} differs from alpha = {self.alpha}")
        if self.budget_mode is Budget_Mode.Fixed_Budget and self.total_budget is None:
            raise ValueError("fixed_budget mode needs total_budget")
        return self


class Problem_Model(str, Enum):
    """
        Generator family of a configured problem
    """
    Block = "block"
    Free_Wilson = "free_wilson"
    Fixture = "fixture"


class Problem_Config(BaseModel):
    """
        A problem instance by generator family. Free-Wilson problems come from an explicit spec, a desk instance with free_wilson_p drugs,
        or the full six-site instance
    """
    model_config = ConfigDict(extra="forbid")

    model: Problem_Model
    block: Optional[Block_Model_Spec] = None
    free_wilson: Optional[Free_Wilson_Spec] = None
    free_wilson_p: Optional[int] = Field(None, ge=8)
    free_wilson_full: bool = False
    free_wilson_seed: int = 2024
    noise_var: float = Field(0.01, ge=0)
    subset: Optional[Tuple[int, int]] = None
    fixture_x: float = 0.01
    fixture_y: float = 0.0
    low_confidence: bool = False

    @model_validator(mode="after")
    def _check_family(self):
        if self.model is Problem_Model.Block and self.block is None:
            raise ValueError("block model needs the block parameters")
        if self.model is Problem_Model.Free_Wilson and self.free_wilson is None and self.free_wilson_p is None and not self.free_wilson_full:
            raise ValueError("free_wilson model needs free_wilson, free_wilson_p or free_wilson_full")
        return self

    def build(self) -> Problem_Spec:
        """
        :return: the configured problem
        """
        if self.model is Problem_Model.Block:
            return build_block_model(self.block)
        if self.model is Problem_Model.Fixture:
            return fixture_problem(self.fixture_x, self.fixture_y, LOW_CONFIDENCE_MEANS if self.low_confidence else FIXTURE_MEANS)
        if self.free_wilson is not None:
            spec = self.free_wilson
        elif self.free_wilson_full:
            spec = full_free_wilson_spec(self.free_wilson_seed, self.noise_var)
        else:
            spec = desk_free_wilson_spec(self.free_wilson_p, self.free_wilson_seed, self.noise_var)
        return build_free_wilson(spec, self.subset)


class Pcc_Sweep_Config(BaseModel):
    """
        Grid of clustering sample sizes and support sizes for empirical PCC against its lower bound
    """
    model_config = ConfigDict(extra="forbid")

    n_values: List[int] = Field(default_factory=lambda: [50, 200, 1000])
    p_s_values: List[int] = Field(default_factory=lambda: [25, 50])
    delta_c: float = Field(0.1, gt=0)
    alpha_q: float = Field(0.05, gt=0)
    reps: int = Field(200, ge=1)


class Experiment_Config(BaseModel):
    """
        One experiment document: the problem, the procedures to compare, their parameters and the replication plan
    """
    model_config = ConfigDict(extra="forbid")

    problem: Problem_Config
    procedures: List[str] = Field(default_factory=lambda: ["p3c-gba"])
    conquer: Conquer_Config = Field(default_factory=Conquer_Config)
    p_values: List[int] = Field(default_factory=list)
    pcc: Pcc_Sweep_Config = Field(default_factory=Pcc_Sweep_Config)
    reps: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)

    def problems(self) -> List[Tuple[int, Problem_Spec]]:
        """
        :return: (p, problem) per entry of p_values, or the single configured problem
        """
        if not self.p_values:
            spec = build_problem(self.problem)
            return [(spec.p, spec)]
        if self.problem.model is not Problem_Model.Free_Wilson:
            raise Configuration_Error("p_values sweeps are defined for desk Free-Wilson problems")
        return [(p, build_problem(self.problem.model_copy(update={"free_wilson_p": p, "free_wilson_full": False, "free_wilson": None})))
                for p in self.p_values]


def load_experiment(path: Union[str, Path]) -> Experiment_Config:
    """
    :param path: JSON document
    :return: the validated configuration
    :raises Configuration_Error: unreadable or invalid document
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        return Experiment_Config.model_validate(document)
    except (OSError, json.JSONDecodeError, ValidationError) as error:
        raise Configuration_Error(f"invalid experiment config {path}: {error}") from error


def build_problem(config: Problem_Config) -> Problem_Spec:
    """
    :return: the problem, construction failures raised as configuration errors carrying their parameters
    """
    try:
        return config.build()
    except Problem_Construction_Error as error:
        raise Configuration_Error(str(error)) from error
