"""Bayesian nonparametric stochastic blockmodels for single networks and collections of networks."""

__version__ = "0.1.0"

from .network import (Network, NetworkCollection, Partition, NetworkValidationError,
                      validate_network, block_sufficient_stats, degree_sequence,
                      clustering_coefficient)
from .partition import PitmanYorParams, eppf_log_prob, sample_partition, co_cluster_prob
from .kernels import KernelSpec, PointMass, network_log_marginal
from .analytics import prior_summary, PriorSummary
from .mcmc import McmcConfig, Trace, run_chain, run_chains
from .summaries import network_incidence, actor_incidence, point_estimate
from .estimator import HierarchicalSBM

__all__ = [
    "Network", "NetworkCollection", "Partition", "NetworkValidationError", "validate_network",
    "block_sufficient_stats", "degree_sequence", "clustering_coefficient",
    "PitmanYorParams", "eppf_log_prob", "sample_partition", "co_cluster_prob",
    "KernelSpec", "PointMass", "network_log_marginal", "prior_summary", "PriorSummary",
    "McmcConfig", "Trace", "run_chain", "run_chains", "network_incidence", "actor_incidence",
    "point_estimate", "HierarchicalSBM",
    "__version__",
]
