"""Builders for Free-Wilson drug-discovery problems and block-correlation problems"""
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, model_validator

from cluster_conquer.exceptions import Problem_Construction_Error
from cluster_conquer.problems.Problem_Spec import Model_Kind, Problem_Spec

logger = logging.getLogger(__name__)

FULL_SITES: List[Tuple[str, int]] = [("R1", 11), ("R2", 8), ("R3", 5), ("R4", 6), ("R5", 11), ("R6", 3)]
ATOM_SCALE: float = float(np.sqrt(0.1))


class Free_Wilson_Spec(BaseModel):
    """
        Additive drug model: value = base + sum over sites of the chosen substituent's effect
    """
    sites: List[Tuple[str, int]]
    base_mean: float = 0.0
    atom_means: List[List[float]]
    atom_vars: List[List[float]]
    noise_var: float = 0.01

    @model_validator(mode="after")
    def _check_shapes(self):
        for values, name in ((self.atom_means, "atom_means"), (self.atom_vars, "atom_vars")):
            if len(values) != len(self.sites):
                raise ValueError(f"{name} has {len(values)} sites, expected {len(self.sites)}")
            for (site, count), site_values in zip(self.sites, values):
                if len(site_values) != count:
                    raise ValueError(f"{name}[{site}] has {len(site_values)} substituents, expected {count}")
        return self

    @property
    def counts(self) -> Tuple[int, ...]:
        """
        :return: substituent count per site
        """
        return tuple(count for _, count in self.sites)

    @property
    def total(self) -> int:
        """
        :return: number of drugs, the product of substituent counts
        """
        return int(np.prod(self.counts))

    @staticmethod
    def random(sites: List[Tuple[str, int]], seed: int, base_mean: float = 0.0, noise_var: float = 0.01,
               site_var_scale: Optional[Dict[str, float]] = None) -> "Free_Wilson_Spec":
        """
        Draws atom means and variances once from N(0, 0.1) restricted to positive values
        :param sites: (site name, substituent count) pairs
        :param seed: generator seed
        :param base_mean: value of the base molecule
        :param noise_var: idiosyncratic variance of each drug
        :param site_var_scale: optional multiplier of the atom variances per site name
        :return: the frozen spec
        """
        rng = np.random.default_rng(seed)
        site_var_scale = {} if site_var_scale is None else site_var_scale
        atom_means, atom_vars = [], []
        for site, count in sites:
            atom_means.append(np.abs(rng.normal(0.0, ATOM_SCALE, count)).tolist())
            atom_vars.append((site_var_scale.get(site, 1.0) * np.abs(rng.normal(0.0, ATOM_SCALE, count))).tolist())
        return Free_Wilson_Spec(sites=sites, base_mean=base_mean, atom_means=atom_means, atom_vars=atom_vars, noise_var=noise_var)


class Block_Model_Spec(BaseModel):
    """
        Clusters with correlation intra_corr inside and inter_corr across, a common variance and a layered mean layout
    """
    cluster_sizes: List[int]
    intra_corr: float
    inter_corr: float
    variance: float = 1.0
    best_mean: float = 1.0
    local_best_mean: float = 0.9
    non_best_mean: float = 0.0
    non_best_spread: float = 0.0

    @property
    def k(self) -> int:
        """
        :return: number of clusters
        """
        return len(self.cluster_sizes)


def build_free_wilson(spec: Free_Wilson_Spec, subset: Optional[Tuple[int, int]] = None) -> Problem_Spec:
    """
    Drugs are enumerated in lexicographic substituent order, first site slowest
    :param spec: Free-Wilson parameters
    :param subset: optional [start, stop) range of drug indices
    :return: factor-model problem whose clusters follow the substituent at the site with the largest total atom variance
    """
    for (site, _), variances in zip(spec.sites, spec.atom_vars):
        if min(variances) <= 0:
            raise Problem_Construction_Error(f"atom variances at site {site} must be positive", {"site": site, "atom_vars": variances})
    if spec.noise_var < 0:
        raise Problem_Construction_Error("noise_var must be nonnegative", {"noise_var": spec.noise_var})
    start, stop = (0, spec.total) if subset is None else subset
    if not 0 <= start < stop <= spec.total:
        raise Problem_Construction_Error(f"subset must lie within [0, {spec.total})", {"subset": subset})
    codes = np.unravel_index(np.arange(start, stop), spec.counts)
    mu = spec.base_mean + sum(np.asarray(means)[code] for means, code in zip(spec.atom_means, codes))
    columns = []
    for variances, code in zip(spec.atom_vars, codes):
        indicator = np.zeros((stop - start, len(variances)))
        indicator[np.arange(stop - start), code] = 1.0
        columns.append(indicator * np.sqrt(variances))
    loadings = np.hstack(columns)
    dominant_site = int(np.argmax([sum(variances) for variances in spec.atom_vars]))
    _, labels = np.unique(codes[dominant_site], return_inverse=True)
    parameters = {"spec": spec.model_dump(), "subset": None if subset is None else list(subset)}
    return Problem_Spec(mu, labels, loadings=loadings, idiosyncratic_var=spec.noise_var,
                        model_kind=Model_Kind.Free_Wilson, parameters=parameters)


def build_block_model(spec: Block_Model_Spec) -> Problem_Spec:
    """
    :param spec: block parameters
    :return: problem with exactly the stated block correlation structure
    """
    parameters = spec.model_dump()
    if not spec.cluster_sizes or min(spec.cluster_sizes) < 1:
        raise Problem_Construction_Error("cluster sizes must be positive", parameters)
    if spec.variance <= 0:
        raise Problem_Construction_Error("variance must be positive", parameters)
    if not -1.0 < spec.inter_corr <= spec.intra_corr <= 1.0:
        raise Problem_Construction_Error("block model needs -1 < inter_corr <= intra_corr <= 1", parameters)
    if spec.intra_corr == spec.inter_corr and spec.k > 1:
        logger.warning(f"intra_corr equals inter_corr ({spec.intra_corr}); clusters are indistinguishable by correlation")
    labels = np.repeat(np.arange(spec.k), spec.cluster_sizes)
    same = labels[:, None] == labels[None, :]
    correlation = np.where(same, spec.intra_corr, spec.inter_corr)
    np.fill_diagonal(correlation, 1.0)
    mu = np.empty(labels.size)
    offset = 0
    for label, size in enumerate(spec.cluster_sizes):
        mu[offset] = spec.best_mean if label == 0 else spec.local_best_mean
        mu[offset + 1:offset + size] = spec.non_best_mean - spec.non_best_spread * np.arange(1, size) / size
        offset += size
    try:
        return Problem_Spec(mu, labels, sigma=spec.variance * correlation, model_kind=Model_Kind.Block, parameters=parameters)
    except Problem_Construction_Error as error:
        raise Problem_Construction_Error(f"block model is not positive semi-definite (intra_corr={spec.intra_corr}, inter_corr={spec.inter_corr}, sizes={spec.cluster_sizes})",
                                         parameters) from error


def desk_free_wilson_spec(p: int = 128, seed: int = 2024, noise_var: float = 0.01) -> Free_Wilson_Spec:
    """
    Free-Wilson instance with 8 clusters: an 8-substituent site with four times the atom variance plus two equal sites
    :param p: number of drugs, 8 times a perfect square
    :param seed: generator seed for the frozen atom effects
    :param noise_var: idiosyncratic variance
    :return: the frozen spec
    """
    side = int(round(np.sqrt(p / 8)))
    if 8 * side * side != p:
        raise ValueError(f"p must be 8 times a perfect square, got {p}")
    sites = [("R1", 8), ("R2", side), ("R3", side)]
    return Free_Wilson_Spec.random(sites, seed, noise_var=noise_var, site_var_scale={"R1": 4.0})


def full_free_wilson_spec(seed: int = 2024, noise_var: float = 0.01) -> Free_Wilson_Spec:
    """
    :param seed: generator seed for the frozen atom effects
    :param noise_var: idiosyncratic variance
    :return: the six-site, 87120-drug instance
    """
    return Free_Wilson_Spec.random(FULL_SITES, seed, noise_var=noise_var)


def problem_from_parameters(kind: Model_Kind, parameters: Dict[str, Any]) -> Problem_Spec:
    """
    :param kind: generator family
    :param parameters: parameters recorded by the builder
    :return: the rebuilt problem
    """
    if kind is Model_Kind.Block:
        return build_block_model(Block_Model_Spec(**parameters))
    if kind is Model_Kind.Free_Wilson:
        subset = parameters.get("subset")
        return build_free_wilson(Free_Wilson_Spec(**parameters["spec"]), None if subset is None else tuple(subset))
    raise ValueError(f"no builder for model kind {kind}")
