"""Collapsed MCMC for exchangeable collections of blockmodel networks.

Block parameters are integrated out.  The state holds the network
clustering ``zeta``, one actor partition per network cluster, the
cluster-level and network-level hyperparameters, and a cache of
``log p(Y_j | xi_{zeta_j})``.

Newborn network clusters (from a split or from opening a new cluster in the
zeta update) draw their (alpha2, beta2) from the hyperprior when those are
sampled, so the hyperprior density cancels in every acceptance ratio.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .. import __version__
from ..kernels import network_log_marginal, sample_theta_posterior, KernelSpec
from ..network import NetworkCollection, Partition, canonical_labels
from ..partition import log_eppf_sizes
from . import _engine as eng
from .config import McmcConfig
from .hyperpriors import rw_alpha, rw_positive
from .trace import Trace, TraceRecord

log = logging.getLogger(__name__)


class CacheCoherenceError(RuntimeError):
    pass


@dataclass
class Cluster:
    labels: np.ndarray
    alpha2: float
    beta2: float


@dataclass
class McmcState:
    zeta: np.ndarray                 # 0-based contiguous cluster index per network
    clusters: list                   # Cluster per occupied network cluster
    alpha1: float
    beta1: float
    lam: np.ndarray                  # (J, 4): a_D, b_D, a_O, b_O per network
    loglik: np.ndarray               # cached log p(Y_j | xi_{zeta_j})
    stats: dict = field(default_factory=lambda: {"split_prop": 0, "split_acc": 0,
                                                 "merge_prop": 0, "merge_acc": 0})

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def members(self, k: int) -> np.ndarray:
        return np.nonzero(self.zeta == k)[0]

    def drop_cluster(self, k: int) -> None:
        del self.clusters[k]
        self.zeta[self.zeta > k] -= 1

    def copy(self) -> "McmcState":
        return McmcState(self.zeta.copy(),
                         [Cluster(c.labels.copy(), c.alpha2, c.beta2) for c in self.clusters],
                         self.alpha1, self.beta1, self.lam.copy(), self.loglik.copy(),
                         dict(self.stats))


class Model:
    """Numeric data and configuration shared by all moves of one chain."""

    def __init__(self, collection: NetworkCollection, config: McmcConfig):
        for spec in collection.kernel_specs:
            if not spec.conjugate:
                raise ValueError("fitting requires conjugate (a, b) kernel hyperparameters")
        self.collection = collection
        self.config = config
        self.hp = config.hyperpriors
        self.data = eng.NetStack(collection.networks,
                                 [spec.family for spec in collection.kernel_specs])
        self.J = collection.num_networks
        self.I = collection.num_actors

    # -- helpers -----------------------------------------------------------
    def loglik(self, j: int, lam: np.ndarray, labels) -> float:
        """log p(Y_j | labels) with ``lam`` the (J, 4) kernel hyperparameter array."""
        return eng.net_loglik(self.data, lam, j, labels)

    def newborn_hyper(self, rng) -> tuple[float, float]:
        cfg = self.config
        a = self.hp.draw_alpha(rng) if cfg.sample_alpha2 else cfg.alpha2
        b = self.hp.draw_beta(rng) if cfg.sample_beta2 else cfg.beta2
        return a, b

    def hyperprior_logdensity(self, state: McmcState) -> float:
        cfg, hp = self.config, self.hp
        out = 0.0
        if cfg.sample_alpha1:
            out += hp.log_alpha(state.alpha1)
        if cfg.sample_beta1:
            out += hp.log_beta(state.beta1)
        for c in state.clusters:
            if cfg.sample_alpha2:
                out += hp.log_alpha(c.alpha2)
            if cfg.sample_beta2:
                out += hp.log_beta(c.beta2)
        if cfg.sample_lambda:
            out += sum(hp.log_kernel(x) for x in state.lam.ravel())
        return out



def initial_state(model: Model, rng) -> McmcState:
    cfg = model.config
    J, I = model.J, model.I
    lam = np.array([spec.as_vector() for spec in model.collection.kernel_specs])
    a1, a2 = cfg.alpha1, cfg.alpha2
    # a sampled discount cannot start on the boundary of its logit walk
    if cfg.sample_alpha1 and a1 == 0.0:
        a1 = 0.05
    if cfg.sample_alpha2 and a2 == 0.0:
        a2 = 0.05
    zeta = np.zeros(J, dtype=np.int64) if (cfg.init_zeta == "single" or J == 1) \
        else np.arange(J, dtype=np.int64)
    clusters = []
    for k in range(int(zeta.max()) + 1):
        members = np.nonzero(zeta == k)[0]
        labels, _ = eng.sequential_allocation(rng.permutation(I), model.data, members, lam,
                                              a2, cfg.beta2, rng)
        clusters.append(Cluster(labels, a2, cfg.beta2))
    loglik = np.array([model.loglik(j, lam, clusters[zeta[j]].labels) for j in range(J)])
    return McmcState(zeta, clusters, a1, cfg.beta1, lam, loglik)


def log_unnormalized_posterior(state: McmcState, model: Model) -> float:
    """Collapsed log posterior up to a constant (uses the likelihood cache)."""
    zeta_sizes = np.bincount(state.zeta)
    out = float(state.loglik.sum())
    out += sum(log_eppf_sizes(np.bincount(c.labels), c.alpha2, c.beta2) for c in state.clusters)
    out += log_eppf_sizes(zeta_sizes, state.alpha1, state.beta1)
    return out + model.hyperprior_logdensity(state)


def audit_cache(state: McmcState, model: Model, tol: float = 1e-8) -> None:
    """Recompute every cached log marginal through the reference implementation."""
    coll = model.collection
    for j in range(model.J):
        lam = state.lam[j]
        spec = KernelSpec(coll.kernel_specs[j].family, tuple(lam[:2]), tuple(lam[2:]))
        part = Partition.from_labels(state.clusters[state.zeta[j]].labels)
        fresh = network_log_marginal(coll.networks[j], part, spec)
        if abs(fresh - state.loglik[j]) > tol * max(1.0, abs(fresh)):
            raise CacheCoherenceError(
                f"network {j}: cached {state.loglik[j]!r} != recomputed {fresh!r}")
    if len(state.clusters) != int(state.zeta.max()) + 1 or \
            np.any(np.bincount(state.zeta) == 0):
        raise CacheCoherenceError("zeta labels are not contiguous")


# --- moves -------------------------------------------------------------------

def gibbs_update_zeta(state: McmcState, model: Model, rng) -> None:
    """Reassign each network to a cluster, one at a time.

    Opening a new cluster uses a single auxiliary actor partition drawn by
    sequential allocation on the network alone, weighted by
    prior x likelihood / proposal density.  A network alone in its cluster
    offers its own partition as the auxiliary one.
    """
    if model.J == 1:
        return
    a1, b1 = state.alpha1, state.beta1
    for j in rng.permutation(model.J):
        lam = state.lam
        one = np.array([j])
        k_old = int(state.zeta[j])
        n_old = int(np.sum(state.zeta == k_old))
        order = rng.permutation(model.I)
        if n_old == 1:
            aux = state.clusters[k_old]
            state.drop_cluster(k_old)
            _, lq = eng.sequential_allocation(order, model.data, one, lam, aux.alpha2,
                                              aux.beta2, target=aux.labels)
        else:
            a2, b2 = model.newborn_hyper(rng)
            labels, lq = eng.sequential_allocation(order, model.data, one, lam, a2, b2, rng)
            aux = Cluster(labels, a2, b2)
        state.zeta[j] = -1
        K = state.num_clusters
        sizes = np.bincount(state.zeta[state.zeta >= 0], minlength=K)
        logw = np.empty(K + 1)
        lls = np.empty(K + 1)
        for k in range(K):
            lls[k] = model.loglik(j, lam, state.clusters[k].labels)
            logw[k] = math.log(sizes[k] - a1) + lls[k]
        lls[K] = model.loglik(j, lam, aux.labels)
        logw[K] = (math.log(b1 + a1 * K) + lls[K]
                   + log_eppf_sizes(np.bincount(aux.labels), aux.alpha2, aux.beta2) - lq)
        k, _ = eng.categorical(logw, rng.random())
        if k == K:
            state.clusters.append(aux)
        state.zeta[j] = k
        state.loglik[j] = lls[k]


def gibbs_update_xi(state: McmcState, k: int, model: Model, rng, sweeps: int = 1) -> None:
    c = state.clusters[k]
    members = state.members(k)
    for _ in range(sweeps):
        eng.gibbs_sweep(c.labels, model.data, members, state.lam, c.alpha2, c.beta2, rng)
    for j in members:
        state.loglik[j] = model.loglik(j, state.lam, c.labels)


def cluster_score(model: Model, lam, members, labels, alpha2, beta2):
    """log p(xi | alpha2, beta2) + sum_j log p(Y_j | xi), plus the per-network terms."""
    lls = {int(j): model.loglik(j, lam, labels) for j in members}
    return log_eppf_sizes(np.bincount(labels), alpha2, beta2) + sum(lls.values()), lls


def split_log_ratio(alpha1, beta1, R, n_a, n_b, score_a, score_b, score_ab,
                    lq_a, lq_b, lq_ab) -> float:
    """Log acceptance ratio for splitting a cluster of ``n_a + n_b`` networks in two.

    ``R`` counts the clusters before the split.  Scores are
    :func:`cluster_score` values; ``lq_*`` are effective log proposal
    densities of the side partitions and of regenerating the merged one.
    The ``2^(n-2)`` term undoes the uniform assignment of the remaining
    networks.  The merge ratio is the negative of this, evaluated with ``R``
    equal to the cluster count after the merge.
    """
    zeta = (math.log(beta1 + R * alpha1) + gammaln(n_a - alpha1) + gammaln(n_b - alpha1)
            - gammaln(n_a + n_b - alpha1) - gammaln(1.0 - alpha1))
    return (zeta + score_a + score_b - score_ab + (n_a + n_b - 2) * math.log(2.0)
            + lq_ab - lq_a - lq_b)


def _current_score(state: McmcState, members, c: Cluster) -> float:
    return log_eppf_sizes(np.bincount(c.labels), c.alpha2, c.beta2) + \
        float(sum(state.loglik[j] for j in members))


def split_merge_step(state: McmcState, model: Model, rng, sweeps: int) -> dict:
    """One split or merge proposal for a uniformly chosen ordered pair of networks."""
    J = model.J
    if J < 2:
        return {"move": None, "accepted": False}
    a, b = (int(x) for x in rng.choice(J, size=2, replace=False))
    a1, b1 = state.alpha1, state.beta1
    ka, kb = int(state.zeta[a]), int(state.zeta[b])
    D, lam = model.data, state.lam
    if ka == kb:
        state.stats["split_prop"] += 1
        members = [int(j) for j in state.members(ka)]
        rest = [j for j in members if j != a and j != b]
        to_b = rng.random(len(rest)) < 0.5
        S_a = [a] + [j for j, t in zip(rest, to_b) if not t]
        S_b = [b] + [j for j, t in zip(rest, to_b) if t]
        parent = state.clusters[ka]
        hb = model.newborn_hyper(rng)
        xi_a, lq_a = eng.propose_partition(D, S_a, lam, parent.alpha2, parent.beta2, rng, sweeps)
        xi_b, lq_b = eng.propose_partition(D, S_b, lam, hb[0], hb[1], rng, sweeps)
        lq_ab = eng.reverse_log_q(parent.labels, D, members, lam, parent.alpha2, parent.beta2,
                                  rng, sweeps)
        sa, lls_a = cluster_score(model, lam, S_a, xi_a, parent.alpha2, parent.beta2)
        sb, lls_b = cluster_score(model, lam, S_b, xi_b, *hb)
        log_r = split_log_ratio(a1, b1, state.num_clusters, len(S_a), len(S_b), sa, sb,
                                _current_score(state, members, parent), lq_a, lq_b, lq_ab)
        accept = math.log(rng.random()) < log_r
        if accept:
            state.stats["split_acc"] += 1
            state.clusters[ka] = Cluster(xi_a, parent.alpha2, parent.beta2)
            state.clusters.append(Cluster(xi_b, *hb))
            kb_new = state.num_clusters - 1
            for j in S_b:
                state.zeta[j] = kb_new
            for j, v in {**lls_a, **lls_b}.items():
                state.loglik[j] = v
        return {"move": "split", "accepted": accept, "log_ratio": log_r}

    state.stats["merge_prop"] += 1
    S_a = [int(j) for j in state.members(ka)]
    S_b = [int(j) for j in state.members(kb)]
    S_ab = S_a + S_b
    ca, cb = state.clusters[ka], state.clusters[kb]
    xi_ab, lq_ab = eng.propose_partition(D, S_ab, lam, ca.alpha2, ca.beta2, rng, sweeps)
    lq_a = eng.reverse_log_q(ca.labels, D, S_a, lam, ca.alpha2, ca.beta2, rng, sweeps)
    lq_b = eng.reverse_log_q(cb.labels, D, S_b, lam, cb.alpha2, cb.beta2, rng, sweeps)
    s_ab, lls_ab = cluster_score(model, lam, S_ab, xi_ab, ca.alpha2, ca.beta2)
    log_r = -split_log_ratio(a1, b1, state.num_clusters - 1, len(S_a), len(S_b),
                             _current_score(state, S_a, ca), _current_score(state, S_b, cb),
                             s_ab, lq_a, lq_b, lq_ab)
    accept = math.log(rng.random()) < log_r
    if accept:
        state.stats["merge_acc"] += 1
        state.clusters[ka] = Cluster(xi_ab, ca.alpha2, ca.beta2)
        for j in S_b:
            state.zeta[j] = ka
        state.drop_cluster(kb)
        for j, v in lls_ab.items():
            state.loglik[j] = v
    return {"move": "merge", "accepted": accept, "log_ratio": log_r}


def update_hyperparams(state: McmcState, model: Model, rng) -> None:
    """Random-walk Metropolis for every hyperparameter flagged as sampled."""
    cfg, hp = model.config, model.hp

    def mh(cur_lp, new_lp, log_jac):
        return math.log(rng.random()) < new_lp - cur_lp + log_jac

    zsizes = np.bincount(state.zeta)
    if cfg.sample_alpha1:
        new, lj = rw_alpha(state.alpha1, hp.alpha_max, cfg.step_alpha, rng)
        if mh(log_eppf_sizes(zsizes, state.alpha1, state.beta1) + hp.log_alpha(state.alpha1),
              log_eppf_sizes(zsizes, new, state.beta1) + hp.log_alpha(new), lj):
            state.alpha1 = new
    if cfg.sample_beta1:
        new, lj = rw_positive(state.beta1, cfg.step_beta, rng)
        if mh(log_eppf_sizes(zsizes, state.alpha1, state.beta1) + hp.log_beta(state.beta1),
              log_eppf_sizes(zsizes, state.alpha1, new) + hp.log_beta(new), lj):
            state.beta1 = new
    for c in state.clusters:
        sizes = np.bincount(c.labels)
        if cfg.sample_alpha2:
            new, lj = rw_alpha(c.alpha2, hp.alpha_max, cfg.step_alpha, rng)
            if mh(log_eppf_sizes(sizes, c.alpha2, c.beta2) + hp.log_alpha(c.alpha2),
                  log_eppf_sizes(sizes, new, c.beta2) + hp.log_alpha(new), lj):
                c.alpha2 = new
        if cfg.sample_beta2:
            new, lj = rw_positive(c.beta2, cfg.step_beta, rng)
            if mh(log_eppf_sizes(sizes, c.alpha2, c.beta2) + hp.log_beta(c.beta2),
                  log_eppf_sizes(sizes, c.alpha2, new) + hp.log_beta(new), lj):
                c.beta2 = new
    if cfg.sample_lambda:
        for j in range(model.J):
            labels = state.clusters[state.zeta[j]].labels
            S, N = eng.block_tables(model.data, j, labels)
            lam = state.lam[j].copy()
            cur = state.loglik[j]
            for p in range(4):
                new, lj = rw_positive(lam[p], cfg.step_lambda, rng)
                prop = lam.copy()
                prop[p] = new
                new_ll = eng.loglik_from_tables(model.data, j, prop, S, N)
                if mh(cur + hp.log_kernel(lam[p]), new_ll + hp.log_kernel(new), lj):
                    lam, cur = prop, new_ll
            state.lam[j] = lam
            state.loglik[j] = cur


def sample_theta(state: McmcState, model: Model, rng) -> list:
    """Draw every network's block parameter matrix from its conjugate posterior."""
    out = []
    for j in range(model.J):
        labels = state.clusters[state.zeta[j]].labels
        L = int(labels.max()) + 1
        S, N = eng.block_tables(model.data, j, labels)
        directed = bool(model.data.directed[j])
        aD, bD, aO, bO = state.lam[j]
        fam = model.collection.kernel_specs[j].family
        theta = np.empty((L, L))
        for k in range(L):
            for l in range(L):
                if not directed and l < k:
                    theta[k, l] = theta[l, k]
                    continue
                hyper = (aD, bD) if k == l else (aO, bO)
                theta[k, l] = sample_theta_posterior(int(N[k, l]), S[k, l], hyper, fam, rng)
        out.append(theta)
    return out


# --- chain driver -------------------------------------------------------------

def state_record(state: McmcState, model: Model, it: int) -> TraceRecord:
    zeta = canonical_labels(state.zeta)
    # cluster k (0-based internal) -> canonical label
    order = []
    for z in state.zeta:
        if int(z) not in order:
            order.append(int(z))
    xi = [list(canonical_labels(state.clusters[k].labels)) for k in order]
    hyper = {"alpha1": state.alpha1, "beta1": state.beta1,
             "alpha2": [state.clusters[k].alpha2 for k in order],
             "beta2": [state.clusters[k].beta2 for k in order],
             "lambda": [[float(x) for x in row] for row in state.lam]}
    return TraceRecord(it, list(zeta), xi, hyper,
                       float(log_unnormalized_posterior(state, model)))


def chain_meta(collection: NetworkCollection, config: McmcConfig, chain: int = 0) -> dict:
    return {"tool": "hsbm", "version": __version__, "seed": config.seed, "chain": chain,
            "config_digest": config.digest(), "num_networks": collection.num_networks,
            "num_actors": collection.num_actors}


def _chain_rng(seed: int, chain: int, n_chains: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(n_chains)[chain])


def run_chain(collection: NetworkCollection, config: McmcConfig, chain: int = 0,
              n_chains: int = 1, sink=None) -> Trace:
    """Run one chain; identical inputs give an identical trace.

    Each iteration runs the zeta Gibbs scan, the split-merge attempts, a Gibbs
    scan of every actor partition, then the hyperparameter updates.
    ``sink`` (a text stream) receives each retained record as it is produced.
    """
    rng = _chain_rng(config.seed, chain, n_chains)
    model = Model(collection, config)
    state = initial_state(model, rng)
    trace = Trace(meta=chain_meta(collection, config, chain))
    if sink is not None:
        sink.write(trace.dumps())
    if model.J == 1 and config.split_merge:
        log.info("single network: zeta is pinned to one cluster, split-merge skipped")
    retained = set(range(config.burn_in, config.iterations, config.thinning))
    for it in range(config.iterations):
        for _ in range(config.zeta_sweeps):
            gibbs_update_zeta(state, model, rng)
        if model.J > 1:
            for _ in range(config.split_merge):
                split_merge_step(state, model, rng, config.launch_sweeps)
        for k in range(state.num_clusters):
            gibbs_update_xi(state, k, model, rng, config.xi_sweeps)
        update_hyperparams(state, model, rng)
        if config.audit_every and (it + 1) % config.audit_every == 0:
            audit_cache(state, model)
        if it in retained:
            rec = state_record(state, model, it + 1)
            trace.append(rec)
            if sink is not None:
                sink.write(rec.to_json() + "\n")
        if config.progress_every and (it + 1) % config.progress_every == 0:
            st = state.stats
            log.info("chain %d iter %d/%d log_post=%.3f clusters=%d split %d/%d merge %d/%d",
                     chain + 1, it + 1, config.iterations,
                     log_unnormalized_posterior(state, model), state.num_clusters,
                     st["split_acc"], st["split_prop"], st["merge_acc"], st["merge_prop"])
    trace.stats = dict(state.stats)
    return trace


def _run_chain_task(args):
    collection, config, chain, n_chains, path = args
    if path is None:
        return run_chain(collection, config, chain, n_chains)
    with open(path, "w") as fh:
        return run_chain(collection, config, chain, n_chains, sink=fh)


def run_chains(collection: NetworkCollection, config: McmcConfig, n_chains: int = 1,
               n_jobs: int = 1, paths=None) -> list:
    """Independent chains with streams spawned from the master seed, ordered by index.

    ``paths`` (one per chain) makes each chain stream its JSON Lines trace to disk.
    """
    if paths is not None and len(paths) != n_chains:
        raise ValueError("need one trace path per chain")
    paths = paths or [None] * n_chains
    tasks = [(collection, config, c, n_chains, paths[c]) for c in range(n_chains)]
    if n_jobs > 1 and n_chains > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(_run_chain_task, tasks))
    return [_run_chain_task(t) for t in tasks]
