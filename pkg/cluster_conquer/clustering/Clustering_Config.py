"""Configuration of a clustering stage"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class Clustering_Method(str, Enum):
    """
        How alternatives are partitioned
    """
    Few_Shot = "few_shot"
    Linkage = "linkage"
    Random = "random"


class Clustering_Config(BaseModel):
    """
        Parameters of the clustering stage; n defaults to the initialization sample size when None
    """
    model_config = ConfigDict(extra="forbid")

    method: Clustering_Method = Clustering_Method.Few_Shot
    k: int = Field(8, ge=1)
    p_s: Optional[int] = Field(None, ge=1)
    p_q: Optional[int] = Field(None, ge=0)
    n: Optional[int] = Field(None, ge=4)
    estimator: str = Field("sample", pattern="^(sample|shrinkage)$")
    reuse_samples: bool = True
    oracle: bool = False
    size_cap: Optional[int] = Field(None, ge=1)
