"""Brute-force posterior quantities for tiny collections."""
import numpy as np
from scipy.special import logsumexp

from hsbm.kernels import network_log_marginal
from hsbm.partition import PitmanYorParams, enumerate_partitions, eppf_log_prob


def exact_posterior(collection, alpha1, beta1, alpha2, beta2):
    """Exact network and actor co-clustering probabilities with fixed hyperparameters.

    Sums over every network clustering and, for each cluster, every actor
    partition.  Returns (J x J network incidence, list of I x I actor incidences,
    dict of posterior probabilities keyed by network clustering labels).
    """
    J, I = collection.num_networks, collection.num_actors
    xis = list(enumerate_partitions(I))
    p2 = PitmanYorParams(alpha2, beta2)
    prior_xi = np.array([eppf_log_prob(x, p2) for x in xis])
    ll = np.array([[network_log_marginal(net, x, spec) for x in xis]
                   for net, spec in zip(collection.networks, collection.kernel_specs)])
    co = np.array([x.co_membership() for x in xis], dtype=float)
    cache = {}

    def cluster(members):
        key = tuple(members)
        if key not in cache:
            lw = prior_xi + ll[list(members)].sum(axis=0)
            lz = logsumexp(lw)
            cache[key] = (lz, np.tensordot(np.exp(lw - lz), co, 1))
        return cache[key]

    p1 = PitmanYorParams(alpha1, beta1)
    zetas = list(enumerate_partitions(J))
    logw = []
    for z in zetas:
        logw.append(eppf_log_prob(z, p1) + sum(cluster(b)[0] for b in z.blocks()))
    logw = np.array(logw)
    post = np.exp(logw - logsumexp(logw))
    D = np.zeros((J, J))
    A = [np.zeros((I, I)) for _ in range(J)]
    for w, z in zip(post, zetas):
        D += w * z.co_membership()
        for b in z.blocks():
            inc = cluster(b)[1]
            for j in b:
                A[j] += w * inc
    return D, A, {z.labels: float(w) for w, z in zip(post, zetas)}


def batch_means_se(x, n_batches=50):
    """Standard error of a chain average from non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    m = x.size // n_batches
    b = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(b.std(ddof=1) / np.sqrt(n_batches))
