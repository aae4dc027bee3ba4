"""Posterior summaries: co-clustering incidence, point estimates, assortativity draws."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .analytics import assortativity_index
from .mcmc.trace import Trace
from .network import Partition, canonical_labels


def _check_trace(trace: Trace) -> None:
    if trace is None or len(trace) == 0:
        raise ValueError("trace has no retained samples")


def check_incidence(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("incidence matrix must be square")
    if not np.allclose(D, D.T) or np.any(D < 0) or np.any(D > 1) or \
            not np.all(np.diag(D) == 1.0):
        raise ValueError("incidence matrix must be symmetric with entries in [0, 1] and unit diagonal")
    return D


def incidence_from_labels(samples) -> np.ndarray:
    """Fraction of label vectors in ``samples`` that put each pair together."""
    arr = np.asarray(samples)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need at least one label vector")
    acc = np.zeros((arr.shape[1], arr.shape[1]))
    for lab in arr:
        acc += lab[:, None] == lab[None, :]
    return acc / arr.shape[0]


def network_incidence(trace: Trace) -> np.ndarray:
    """J x J posterior probabilities that two networks share a cluster."""
    _check_trace(trace)
    return incidence_from_labels([r.zeta for r in trace])


def actor_incidence(trace: Trace, j: int) -> np.ndarray:
    """I x I posterior probabilities that two actors share a faction in network ``j``."""
    _check_trace(trace)
    J = trace.num_networks
    if not (0 <= j < J):
        raise IndexError(f"network index {j} out of range for {J} networks")
    return incidence_from_labels([r.xi_for_network(j) for r in trace])


def expected_utility(labels, incidence: np.ndarray, a: float = 1.0, b: float = 1.0) -> float:
    """U = sum over pairs placed together of (incidence - b / (a + b))."""
    _check_weights(a, b)
    lab = np.asarray(labels)
    together = np.triu(lab[:, None] == lab[None, :], 1)
    return float(np.sum((incidence - b / (a + b))[together]))


def _check_weights(a, b):
    if a < 0 or b < 0 or a + b <= 0 or not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("loss weights need a >= 0, b >= 0 and a + b > 0")


def greedy_merge_path(incidence: np.ndarray, a: float = 1.0, b: float = 1.0) -> list:
    """Partitions visited by merging, from singletons, the pair of blocks with the largest U gain."""
    n = incidence.shape[0]
    W = incidence - b / (a + b)
    blocks = [[i] for i in range(n)]
    path = [list(range(n))]
    while len(blocks) > 1:
        best, pair = -math.inf, None
        for p, q in itertools.combinations(range(len(blocks)), 2):
            gain = W[np.ix_(blocks[p], blocks[q])].sum()
            if gain > best:
                best, pair = gain, (p, q)
        p, q = pair
        blocks[p] = blocks[p] + blocks[q]
        del blocks[q]
        lab = np.empty(n, dtype=int)
        for k, blk in enumerate(blocks):
            lab[blk] = k
        path.append(list(lab))
    return path


@dataclass(frozen=True)
class PointEstimate:
    partition: Partition
    utility: float
    a: float
    b: float

    def as_dict(self) -> dict:
        return {"labels": list(self.partition.labels), "utility": self.utility,
                "a": self.a, "b": self.b}


def point_estimate(incidence, a: float = 1.0, b: float = 1.0, candidates=None) -> PointEstimate:
    """Candidate partition maximising the expected-utility form of the pairwise loss.

    Candidates are ``candidates`` plus the greedy merge path (which begins at
    all singletons and ends at one block).  Ties go to fewer blocks, then to
    the lexicographically smallest canonical labels.  With ``a = 0`` every
    pair carries a loss for being joined whatever the incidence, so the
    all-singletons partition is returned.
    """
    _check_weights(a, b)
    D = check_incidence(incidence)
    n = D.shape[0]
    if a == 0:
        part = Partition.singletons(n)
        return PointEstimate(part, expected_utility(part.labels, D, a, b), a, b)
    pool = {canonical_labels(c) for c in (candidates or [])}
    pool.update(canonical_labels(c) for c in greedy_merge_path(D, a, b))
    for c in pool:
        if len(c) != n:
            raise ValueError("candidate partition length does not match the incidence matrix")
    scored = [(expected_utility(c, D, a, b), c) for c in pool]
    top = max(u for u, _ in scored)
    # utilities are sums of the same floats, so compare with a small tolerance
    tied = [c for u, c in scored if u >= top - 1e-9 * max(1.0, abs(top))]
    best = min(tied, key=lambda c: (max(c), c))
    return PointEstimate(Partition(best), expected_utility(best, D, a, b), a, b)


def zeta_point_estimate(trace: Trace, a: float = 1.0, b: float = 1.0) -> PointEstimate:
    _check_trace(trace)
    return point_estimate(network_incidence(trace), a, b, [r.zeta for r in trace])


def xi_point_estimate(trace: Trace, j: int, a: float = 1.0, b: float = 1.0) -> PointEstimate:
    _check_trace(trace)
    return point_estimate(actor_incidence(trace, j), a, b, [r.xi_for_network(j) for r in trace])


def posterior_assortativity(trace: Trace, j: int, family: str, lam=None) -> np.ndarray:
    """Assortativity index of network ``j`` evaluated at each retained sample's kernel hyperparameters.

    ``lam`` (a_D, b_D, a_O, b_O) is used when the trace records none.
    """
    _check_trace(trace)
    out = np.empty(len(trace))
    for t, rec in enumerate(trace):
        row = rec.hyper.get("lambda")
        if row is not None:
            row = row[j]
        elif lam is not None:
            row = lam
        else:
            raise KeyError("trace has no kernel hyperparameter records and none were supplied")
        out[t] = assortativity_index(tuple(row[:2]), tuple(row[2:]), family)
    return out
