"""Compiled inner loops for the collapsed sampler.

Partitions are held as 0-based contiguous label arrays; ``-1`` marks an
actor that is not currently seated (removed for a Gibbs step, or not yet
allocated).  Networks of a collection are stacked into one
:class:`NetStack`; every routine takes an index array selecting the
networks that share the partition being updated.

Random numbers are drawn by the caller (a permutation and one uniform per
actor) so that numpy's generator remains the only source of randomness.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..kernels import BERNOULLI_BETA
from ..partition import log_eppf_sizes


class NetStack:
    """Read-only numeric arrays for all networks of a collection."""

    def __init__(self, networks, families):
        J = len(networks)
        I = networks[0].num_actors
        self.I = I
        self.Y = np.zeros((J, I, I))
        self.self_y = np.zeros((J, I))
        self.self_n = np.zeros(J)
        self.directed = np.zeros(J, dtype=np.bool_)
        self.fam = np.zeros(J, dtype=np.int64)
        self.log_fact = np.zeros(J)
        for j, (net, family) in enumerate(zip(networks, families)):
            y = np.array(net.values, dtype=float)
            if not net.acyclic:
                self.self_y[j] = np.diag(y)
                self.self_n[j] = 1.0
            np.fill_diagonal(y, 0.0)
            self.Y[j] = y
            self.directed[j] = net.directed
            self.fam[j] = 0 if family == BERNOULLI_BETA else 1
            self.log_fact[j] = net.log_factorial_sum()

    def args(self):
        return self.Y, self.self_y, self.self_n, self.directed, self.fam, self.log_fact


@njit(cache=True)
def _f(fam, a, b, s, n):
    """Partition-dependent part of a block log marginal (zero for empty blocks)."""
    if n == 0.0:
        return 0.0
    if fam == 0:
        return (math.lgamma(a + s) + math.lgamma(b + n - s) - math.lgamma(a + b + n)
                - math.lgamma(a) - math.lgamma(b) + math.lgamma(a + b))
    return math.lgamma(a + s) - math.lgamma(a) + a * math.log(b) - (a + s) * math.log(b + n)


@njit(cache=True)
def _tables(Y, self_y, self_n, directed, labels, L):
    I = labels.size
    S = np.zeros((L, L))
    N = np.zeros((L, L))
    c = np.zeros(L)
    for i in range(I):
        li = labels[i]
        if li < 0:
            continue
        c[li] += 1.0
        for k in range(I):
            lk = labels[k]
            if lk >= 0 and k != i:
                S[li, lk] += Y[i, k]
    for l in range(L):
        for m in range(L):
            N[l, m] = c[l] * c[m]
    for i in range(I):
        li = labels[i]
        if li >= 0:
            S[li, li] += self_y[i] if directed else 0.0
    for l in range(L):
        if directed:
            N[l, l] = c[l] * c[l] + c[l] * (self_n - 1.0)
        else:
            S[l, l] = S[l, l] / 2.0
            N[l, l] = c[l] * (c[l] - 1.0) / 2.0 + c[l] * self_n
    if not directed:
        for i in range(I):
            li = labels[i]
            if li >= 0:
                S[li, li] += self_y[i]
    return S, N, c


@njit(cache=True)
def _loglik_tables(fam, directed, lam, S, N, log_fact):
    L = S.shape[0]
    tot = 0.0
    for l in range(L):
        tot += _f(fam, lam[0], lam[1], S[l, l], N[l, l])
        for m in range(L):
            if m == l or (not directed and m < l):
                continue
            tot += _f(fam, lam[2], lam[3], S[l, m], N[l, m])
    return tot - log_fact


@njit(cache=True)
def _loglik(Y, self_y, self_n, directed, fam, log_fact, lam, j, labels):
    L = 0
    for x in labels:
        if x + 1 > L:
            L = x + 1
    S, N, _ = _tables(Y[j], self_y[j], self_n[j], directed[j], labels, L)
    return _loglik_tables(fam[j], directed[j], lam[j], S, N, log_fact[j])


@njit(cache=True)
def _deltas_one(Y, self_y, sn, directed, fam, lam, labels, L, i, out):
    """Add, for each faction (entry L is a new one), the change in log p(Y) from seating i."""
    S, N, c = _tables(Y, self_y, sn, directed, labels, L)
    I = labels.size
    out_s = np.zeros(L)
    in_s = np.zeros(L)
    for k in range(I):
        lk = labels[k]
        if lk >= 0:
            out_s[lk] += Y[i, k]
            in_s[lk] += Y[k, i]
    aD, bD, aO, bO = lam[0], lam[1], lam[2], lam[3]
    sy = self_y[i]
    for l in range(L + 1):
        d = 0.0
        for m in range(L):
            if m == l:
                continue
            if l < L:
                s_lm, n_lm, s_ml, n_ml = S[l, m], N[l, m], S[m, l], N[m, l]
            else:
                s_lm, n_lm, s_ml, n_ml = 0.0, 0.0, 0.0, 0.0
            d += _f(fam, aO, bO, s_lm + out_s[m], n_lm + c[m]) - _f(fam, aO, bO, s_lm, n_lm)
            if directed:
                d += _f(fam, aO, bO, s_ml + in_s[m], n_ml + c[m]) - _f(fam, aO, bO, s_ml, n_ml)
        if l < L:
            if directed:
                d += _f(fam, aD, bD, S[l, l] + out_s[l] + in_s[l] + sy, N[l, l] + 2.0 * c[l] + sn) \
                    - _f(fam, aD, bD, S[l, l], N[l, l])
            else:
                d += _f(fam, aD, bD, S[l, l] + out_s[l] + sy, N[l, l] + c[l] + sn) \
                    - _f(fam, aD, bD, S[l, l], N[l, l])
        else:
            d += _f(fam, aD, bD, sy, sn)
        out[l] += d


@njit(cache=True)
def _seat_logw(Y, self_y, self_n, directed, fam, lam, idx, labels, counts, L, i, alpha, beta):
    logw = np.empty(L + 1)
    for l in range(L):
        logw[l] = math.log(counts[l] - alpha)
    logw[L] = math.log(beta + alpha * L)
    for j in idx:
        _deltas_one(Y[j], self_y[j], self_n[j], directed[j], fam[j], lam[j], labels, L, i, logw)
    return logw


@njit(cache=True)
def _categorical(logw, u):
    """Inverse-CDF draw; returns (index, log probability, log normaliser)."""
    m = -np.inf
    for x in logw:
        if x > m:
            m = x
    n = logw.size
    w = np.empty(n)
    tot = 0.0
    for k in range(n):
        w[k] = math.exp(logw[k] - m)
        tot += w[k]
    target = u * tot
    acc = 0.0
    k = n - 1
    for h in range(n):
        acc += w[h]
        if acc > target:
            k = h
            break
    while w[k] == 0.0:
        k -= 1
    lognorm = m + math.log(tot)
    return k, logw[k] - lognorm, lognorm


@njit(cache=True)
def _gibbs_sweep(Y, self_y, self_n, directed, fam, lam, idx, labels, order, u, alpha, beta):
    I = labels.size
    counts = np.zeros(I + 1)
    L = 0
    for x in labels:
        counts[x] += 1.0
        if x + 1 > L:
            L = x + 1
    for h in range(I):
        i = order[h]
        old = labels[i]
        labels[i] = -1
        counts[old] -= 1.0
        if counts[old] == 0.0:
            for k in range(I):
                if labels[k] > old:
                    labels[k] -= 1
            for l in range(old, L - 1):
                counts[l] = counts[l + 1]
            counts[L - 1] = 0.0
            L -= 1
        logw = _seat_logw(Y, self_y, self_n, directed, fam, lam, idx, labels, counts, L, i,
                          alpha, beta)
        if not np.all(np.isfinite(logw)):
            raise FloatingPointError("non-finite Gibbs weights")
        k, _, _ = _categorical(logw, u[h])
        labels[i] = k
        counts[k] += 1.0
        if k == L:
            L += 1


@njit(cache=True)
def _sequential(Y, self_y, self_n, directed, fam, lam, idx, order, u, alpha, beta, target, forced):
    I = order.size
    labels = -np.ones(I, dtype=np.int64)
    counts = np.zeros(I + 1)
    mapping = -np.ones(I + 1, dtype=np.int64)
    L = 0
    logq = 0.0
    for h in range(I):
        i = order[h]
        if h == 0:
            k = 0
        else:
            logw = _seat_logw(Y, self_y, self_n, directed, fam, lam, idx, labels, counts, L, i,
                              alpha, beta)
            if forced:
                k = mapping[target[i]]
                if k < 0:
                    k = L
                m = logw.max()
                logq += logw[k] - (m + math.log(np.sum(np.exp(logw - m))))
            else:
                k, lp, _ = _categorical(logw, u[h])
                logq += lp
        if forced and mapping[target[i]] < 0:
            mapping[target[i]] = k
        labels[i] = k
        counts[k] += 1.0
        if k == L:
            L += 1
    return labels, logq


# --- Python-facing wrappers ---------------------------------------------------

def _idx(idx) -> np.ndarray:
    return np.asarray(idx, dtype=np.int64)


def net_loglik(data: NetStack, lam: np.ndarray, j: int, labels: np.ndarray) -> float:
    """log p(Y_j | partition) for a complete 0-based label array."""
    return float(_loglik(*data.args(), lam, j, labels))


def block_tables(data: NetStack, j: int, labels: np.ndarray):
    """(S, N): value sums and dyad counts per block.

    Undirected tables are symmetric with the unordered block in both
    ``[k, l]`` and ``[l, k]``.
    """
    L = int(labels.max()) + 1
    S, N, _ = _tables(data.Y[j], data.self_y[j], data.self_n[j], data.directed[j], labels, L)
    return S, N


def loglik_from_tables(data: NetStack, j: int, lam_row, S, N) -> float:
    return float(_loglik_tables(data.fam[j], data.directed[j], np.asarray(lam_row, float), S, N,
                                data.log_fact[j]))


def seating_log_weights(data: NetStack, idx, lam, labels, i, alpha, beta) -> np.ndarray:
    """Unnormalised log weights for seating actor ``i`` (unseated in ``labels``)."""
    seated = labels[labels >= 0]
    counts = np.bincount(seated).astype(float) if seated.size else np.zeros(0)
    L = counts.size
    padded = np.zeros(labels.size + 1)
    padded[:L] = counts
    Y, sy, sn, dr, fam, _ = data.args()
    return _seat_logw(Y, sy, sn, dr, fam, lam, _idx(idx), labels, padded, L, i, alpha, beta)


def categorical(logw: np.ndarray, u: float) -> tuple[int, float]:
    k, lp, _ = _categorical(np.asarray(logw, dtype=float), u)
    return int(k), float(lp)


def gibbs_sweep(labels: np.ndarray, data: NetStack, idx, lam, alpha: float, beta: float,
                rng) -> None:
    """One collapsed Gibbs scan over actors in random order, in place."""
    I = labels.size
    order = rng.permutation(I)
    u = rng.random(I)
    Y, sy, sn, dr, fam, _ = data.args()
    _gibbs_sweep(Y, sy, sn, dr, fam, lam, _idx(idx), labels, order, u, alpha, beta)


def sequential_allocation(order, data: NetStack, idx, lam, alpha: float, beta: float, rng=None,
                          target: np.ndarray | None = None):
    """Seat actors in ``order`` using CRP weights times data predictives.

    Returns (labels, log probability of the realised seating path).  With
    ``target`` given, the path is forced to reproduce that partition and only
    its probability is computed.
    """
    order = np.asarray(order, dtype=np.int64)
    I = order.size
    Y, sy, sn, dr, fam, _ = data.args()
    if target is None:
        u = rng.random(I)
        tgt = np.zeros(I, dtype=np.int64)
    else:
        u = np.zeros(I)
        tgt = np.asarray(target, dtype=np.int64)
    labels, logq = _sequential(Y, sy, sn, dr, fam, lam, _idx(idx), order, u, alpha, beta, tgt,
                               target is not None)
    return labels, float(logq)


def restricted_log_target(labels, data: NetStack, idx, lam, alpha, beta) -> float:
    out = log_eppf_sizes(np.bincount(labels), alpha, beta)
    for j in idx:
        out += net_loglik(data, lam, int(j), labels)
    return out


def propose_partition(data: NetStack, idx, lam, alpha, beta, rng, sweeps: int):
    """Sequential allocation followed by ``sweeps`` Gibbs scans.

    Returns (labels, effective log proposal density).  The scans leave the
    restricted posterior invariant and are reversible as a random-order
    mixture, so the path contributes ``target(final) / target(launch)``.
    """
    labels, logq = sequential_allocation(rng.permutation(data.I), data, idx, lam, alpha, beta,
                                         rng)
    if sweeps:
        start = restricted_log_target(labels, data, idx, lam, alpha, beta)
        for _ in range(sweeps):
            gibbs_sweep(labels, data, idx, lam, alpha, beta, rng)
        logq += restricted_log_target(labels, data, idx, lam, alpha, beta) - start
    return labels, logq


def reverse_log_q(current: np.ndarray, data: NetStack, idx, lam, alpha, beta, rng,
                  sweeps: int) -> float:
    """Effective proposal density for regenerating ``current`` by :func:`propose_partition`.

    Runs the reverse path (Gibbs scans started at ``current``) and scores the
    launch state it reaches under a fresh allocation order.
    """
    labels = current.copy()
    end = 0.0
    if sweeps:
        end = restricted_log_target(labels, data, idx, lam, alpha, beta)
        for _ in range(sweeps):
            gibbs_sweep(labels, data, idx, lam, alpha, beta, rng)
    order = rng.permutation(labels.size)
    _, logq = sequential_allocation(order, data, idx, lam, alpha, beta, target=labels)
    if sweeps:
        logq += end - restricted_log_target(labels, data, idx, lam, alpha, beta)
    return logq
