"""Exceptions raised by cluster_conquer operations"""
from typing import Optional


class Cluster_Conquer_Error(Exception):
    """
        Base class for errors raised by the toolkit
    """


class Problem_Construction_Error(Cluster_Conquer_Error, ValueError):
    """
        A problem instance could not be built from the given parameters
    """

    def __init__(self, message: str, parameters: Optional[dict] = None):
        self.parameters = {} if parameters is None else parameters
        super().__init__(f"{message} (parameters: {self.parameters})" if self.parameters else message)


class Factorization_Error(Cluster_Conquer_Error):
    """
        A covariance matrix could not be factored even after jitter escalation
    """


class Insufficient_Observations_Error(Cluster_Conquer_Error):
    """
        Not enough jointly observed replications to estimate a covariance
    """


class Degenerate_Context_Error(Cluster_Conquer_Error):
    """
        var(x_tau - x_i) is not positive for some competitor i
    """

    def __init__(self, tau: int, index: int, variance: float):
        self.tau = tau
        self.index = index
        self.variance = variance
        super().__init__(f"degenerate PCS context: lambda for (tau={tau}, i={index}) is {variance:.3e}")


class Domain_Error(Cluster_Conquer_Error, ValueError):
    """
        An argument lies outside the domain of a statistical formula
    """


class Convergence_Error(Cluster_Conquer_Error):
    """
        An iterative or quadrature routine failed to converge
    """


class Clustering_Error(Cluster_Conquer_Error):
    """
        Clustering could not produce the requested partition
    """


class Allocation_Error(Cluster_Conquer_Error):
    """
        A budget allocation could not be computed
    """

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message if index is None else f"{message} (alternative {index})")


class Configuration_Error(Cluster_Conquer_Error, ValueError):
    """
        An experiment configuration is invalid
    """


class Stage_Error(Cluster_Conquer_Error):
    """
        A procedure stage failed; wraps the original error with the stage tag
    """

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")
