"""scikit-learn style front end to the multi-network sampler."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_collection, check_positive_int, check_seed
from .mcmc import McmcConfig, Trace, run_chains
from .summaries import (actor_incidence, network_incidence, posterior_assortativity,
                        xi_point_estimate, zeta_point_estimate)


class HierarchicalSBM(ClusterMixin, BaseEstimator):
    """Cluster networks that share actors by their faction structure.

    ``fit`` runs the collapsed sampler and stores the pooled trace; the
    network clustering point estimate minimises the pairwise loss with
    weights ``a`` (joining) and ``b`` (separating).

    Fitted attributes: ``trace_``, ``traces_``, ``network_incidence_``,
    ``labels_`` (0-based network cluster labels), ``actor_incidence_``
    (one I x I matrix per network), ``actor_labels_`` (0-based faction
    labels per network), ``utility_``.
    """

    def __init__(self, iterations=2000, burn_in=500, thinning=1, n_chains=1, n_jobs=1,
                 alpha1=0.0, beta1=1.0, alpha2=0.0, beta2=1.0,
                 sample_alpha1=False, sample_beta1=True, sample_alpha2=False, sample_beta2=True,
                 sample_lambda=False, launch_sweeps=2, split_merge=1, a=1.0, b=1.0,
                 random_state=None):
        self.iterations = iterations
        self.burn_in = burn_in
        self.thinning = thinning
        self.n_chains = n_chains
        self.n_jobs = n_jobs
        self.alpha1 = alpha1
        self.beta1 = beta1
        self.alpha2 = alpha2
        self.beta2 = beta2
        self.sample_alpha1 = sample_alpha1
        self.sample_beta1 = sample_beta1
        self.sample_alpha2 = sample_alpha2
        self.sample_beta2 = sample_beta2
        self.sample_lambda = sample_lambda
        self.launch_sweeps = launch_sweeps
        self.split_merge = split_merge
        self.a = a
        self.b = b
        self.random_state = random_state

    def _config(self) -> McmcConfig:
        return McmcConfig(
            iterations=check_positive_int(self.iterations, "iterations"),
            burn_in=check_positive_int(self.burn_in, "burn_in", 0),
            thinning=check_positive_int(self.thinning, "thinning"),
            seed=check_seed(self.random_state),
            launch_sweeps=check_positive_int(self.launch_sweeps, "launch_sweeps", 0),
            split_merge=check_positive_int(self.split_merge, "split_merge", 0),
            alpha1=self.alpha1, beta1=self.beta1, alpha2=self.alpha2, beta2=self.beta2,
            sample_alpha1=self.sample_alpha1, sample_beta1=self.sample_beta1,
            sample_alpha2=self.sample_alpha2, sample_beta2=self.sample_beta2,
            sample_lambda=self.sample_lambda)

    def fit(self, X, y=None, directed=False, acyclic=True, family=None):
        """X: a NetworkCollection, a list of Networks, or a (J, I, I) array."""
        coll = check_collection(X, directed, acyclic, family)
        cfg = self._config()
        n_chains = check_positive_int(self.n_chains, "n_chains")
        self.traces_ = run_chains(coll, cfg, n_chains, check_positive_int(self.n_jobs, "n_jobs"))
        self.trace_ = Trace.pooled(self.traces_, meta={"chains": n_chains})
        self.collection_ = coll
        self.network_incidence_ = network_incidence(self.trace_)
        est = zeta_point_estimate(self.trace_, self.a, self.b)
        self.labels_ = est.partition.as_array()
        self.utility_ = est.utility
        J = coll.num_networks
        self.actor_incidence_ = [actor_incidence(self.trace_, j) for j in range(J)]
        self.actor_labels_ = [xi_point_estimate(self.trace_, j, self.a, self.b).partition.as_array()
                              for j in range(J)]
        self.n_features_in_ = coll.num_actors
        return self

    def assortativity_samples(self, j: int) -> np.ndarray:
        check_is_fitted(self, "trace_")
        spec = self.collection_.kernel_specs[j]
        return posterior_assortativity(self.trace_, j, spec.family, spec.as_vector())
