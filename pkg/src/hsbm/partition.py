"""Two-parameter (Pitman-Yor) Chinese restaurant process machinery."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .network import Partition


@dataclass(frozen=True)
class PitmanYorParams:
    """Discount ``alpha`` in [0, 1) and concentration ``beta`` > 0."""

    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")


def predictive_weights(counts: Sequence[int], n: int, params: PitmanYorParams) -> np.ndarray:
    """Seating probabilities for the next customer: existing tables, then a new one."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts <= 0):
        raise ValueError("occupancy counts must be positive")
    if counts.sum() != n:
        raise ValueError(f"counts sum to {counts.sum()}, expected {n}")
    if n == 0:
        return np.array([1.0])
    K = counts.size
    w = np.empty(K + 1)
    w[:K] = counts - params.alpha
    w[K] = params.beta + params.alpha * K
    return w / (params.beta + n)


def eppf_log_prob(partition: Partition | Sequence[int], params: PitmanYorParams) -> float:
    """Log probability of a partition (any labelling) under the two-parameter CRP."""
    sizes = partition.sizes if isinstance(partition, Partition) else \
        Partition.from_labels(partition).sizes
    return log_eppf_sizes(sizes, params.alpha, params.beta)


def log_eppf_sizes(sizes, alpha: float, beta: float) -> float:
    sizes = np.asarray(sizes, dtype=float)
    n = sizes.sum()
    L = sizes.size
    if n == 0:
        return 0.0
    # Gamma(beta+1)/Gamma(beta+n) * prod_{l<L}(beta + l alpha) * prod_l Gamma(m_l-alpha)/Gamma(1-alpha)
    out = gammaln(beta + 1.0) - gammaln(beta + n)
    if L > 1:
        out += np.log(beta + alpha * np.arange(1, L)).sum()
    out += (gammaln(sizes - alpha) - gammaln(1.0 - alpha)).sum()
    return float(out)


def seating_log_prob(partition: Partition, params: PitmanYorParams,
                     order: Sequence[int] | None = None) -> float:
    """Log product of predictive probabilities along a seating order."""
    labels = partition.labels
    order = range(len(labels)) if order is None else order
    counts: dict[int, int] = {}
    logp = 0.0
    for seated, i in enumerate(order):
        lab = labels[i]
        K = len(counts)
        if lab in counts:
            logp += math.log(counts[lab] - params.alpha)
            counts[lab] += 1
        else:
            logp += math.log(params.beta + params.alpha * K) if seated else 0.0
            counts[lab] = 1
        if seated:
            logp -= math.log(params.beta + seated)
    return logp


def sample_partition(n: int, params: PitmanYorParams, rng: np.random.Generator) -> Partition:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Partition(tuple(_crp_labels(n, params, rng)))


def _crp_labels(n: int, params: PitmanYorParams, rng) -> list[int]:
    a, b = params.alpha, params.beta
    labels = [1]
    counts = [1]
    u = rng.random(n)
    for i in range(1, n):
        K = len(counts)
        target = u[i] * (b + i)
        acc = 0.0
        choice = K
        for k in range(K):
            acc += counts[k] - a
            if target < acc:
                choice = k
                break
        if choice == K:
            counts.append(1)
        else:
            counts[choice] += 1
        labels.append(choice + 1)
    return labels


def co_cluster_prob(params: PitmanYorParams) -> float:
    """Prior probability that two given elements share a block."""
    return (1.0 - params.alpha) / (params.beta + 1.0)


def triple_pattern_probs(params: PitmanYorParams) -> tuple[float, float, float]:
    """(all three together, one specific pair together, all apart).

    The middle value is for one labelled pattern; there are three of them.
    """
    a, b = params.alpha, params.beta
    denom = (b + 1.0) * (b + 2.0)
    return ((1 - a) * (2 - a) / denom,
            (1 - a) * (b + a) / denom,
            (b + a) * (b + 2 * a) / denom)


def sample_faction_sizes(I: int, params: PitmanYorParams, rng: np.random.Generator):
    """Number of factions and their sizes, in order of first appearance."""
    part = sample_partition(I, params, rng)
    return part.num_blocks, part.sizes


def expected_num_clusters(I: int, params: PitmanYorParams, n_samples: int,
                          rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of E(K) and its standard error."""
    if I == 1:
        return 1.0, 0.0
    ks = np.array([sample_partition(I, params, rng).num_blocks for _ in range(n_samples)],
                  dtype=float)
    return float(ks.mean()), float(ks.std(ddof=1) / math.sqrt(n_samples))


def asymptotic_num_clusters(I: int, beta: float) -> float:
    return beta * math.log((beta + I) / beta)


def enumerate_partitions(n: int) -> Iterator[Partition]:
    """All set partitions of ``n`` elements as canonical restricted growth strings."""
    if n == 0:
        yield Partition(())
        return

    def rec(prefix: list[int], mx: int):
        if len(prefix) == n:
            yield Partition(tuple(prefix))
            return
        for lab in range(1, mx + 2):
            prefix.append(lab)
            yield from rec(prefix, max(mx, lab))
            prefix.pop()

    yield from rec([1], 1)
