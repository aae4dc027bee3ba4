from .config import McmcConfig
from .hyperpriors import Hyperpriors
from .sampler import (CacheCoherenceError, McmcState, Model, audit_cache, gibbs_update_xi,
                      gibbs_update_zeta, initial_state, log_unnormalized_posterior, run_chain,
                      run_chains, sample_theta, split_log_ratio, split_merge_step,
                      update_hyperparams)
from .trace import Trace, TraceRecord

__all__ = ["McmcConfig", "Hyperpriors", "McmcState", "Model", "CacheCoherenceError", "Trace",
           "TraceRecord", "audit_cache", "gibbs_update_xi", "gibbs_update_zeta", "initial_state",
           "log_unnormalized_posterior", "run_chain", "run_chains", "sample_theta",
           "split_log_ratio", "split_merge_step", "update_hyperparams"]
