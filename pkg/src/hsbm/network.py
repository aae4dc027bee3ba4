"""Networks, collections of networks and partitions of their actors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

BINARY = "binary"
COUNT = "count"
FAMILIES = (BINARY, COUNT)


class NetworkValidationError(ValueError):
    """Raised when an adjacency matrix violates its declared metadata."""


def canonical_labels(labels) -> tuple[int, ...]:
    """Relabel so the first element is 1 and each new label is max + 1."""
    mapping: dict = {}
    out = []
    for lab in labels:
        if isinstance(lab, np.generic):
            lab = lab.item()
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out.append(mapping[lab])
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """A set partition stored as first-appearance canonical labels (1-based).

    Construct with :meth:`from_labels` to canonicalise arbitrary labels.
    """

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if labels != canonical_labels(labels):
            raise ValueError(f"labels {labels} are not in canonical form")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        return cls(canonical_labels(labels))

    @classmethod
    def single_block(cls, n: int) -> "Partition":
        return cls((1,) * n)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def num_blocks(self) -> int:
        return max(self.labels) if self.labels else 0

    @property
    def sizes(self) -> tuple[int, ...]:
        counts = [0] * self.num_blocks
        for lab in self.labels:
            counts[lab - 1] += 1
        return tuple(counts)

    def blocks(self) -> list[list[int]]:
        """Element indices (0-based) of each block, in label order."""
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for i, lab in enumerate(self.labels):
            out[lab - 1].append(i)
        return out

    def as_array(self) -> np.ndarray:
        """0-based integer labels."""
        return np.asarray(self.labels, dtype=np.int64) - 1

    def permuted(self, perm: Sequence[int]) -> "Partition":
        """Partition of the permuted elements: new element ``t`` is old ``perm[t]``."""
        return Partition.from_labels([self.labels[p] for p in perm])

    def co_membership(self) -> np.ndarray:
        lab = np.asarray(self.labels)
        return (lab[:, None] == lab[None, :]).astype(float)


@dataclass(frozen=True, eq=False)
class Network:
    """One relation over ``I`` actors.

    ``values`` is always the full ``I x I`` matrix; for undirected networks
    each unordered dyad is modelled once.  With ``acyclic`` set the diagonal
    is a structural zero.
    """

    values: np.ndarray
    directed: bool = False
    acyclic: bool = True
    family: str = BINARY

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def num_actors(self) -> int:
        return self.values.shape[0]

    def dyad_mask(self) -> np.ndarray:
        """Boolean mask of modelled dyads (upper triangle for undirected)."""
        n = self.num_actors
        k = 1 if self.acyclic else 0
        if self.directed:
            mask = np.ones((n, n), dtype=bool)
            if self.acyclic:
                np.fill_diagonal(mask, False)
            return mask
        return np.triu(np.ones((n, n), dtype=bool), k=k)

    def dyad_values(self) -> np.ndarray:
        return self.values[self.dyad_mask()]

    def log_factorial_sum(self) -> float:
        """Sum of log(y!) over modelled dyads (zero for binary networks)."""
        if self.family == BINARY:
            return 0.0
        return float(gammaln(self.dyad_values() + 1.0).sum())


def validate_network(values, directed: bool = False, acyclic: bool = True,
                     family: str = BINARY) -> Network:
    """Check a raw matrix against its declared metadata and wrap it."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NetworkValidationError(f"matrix must be square, got shape {arr.shape}")
    if family not in FAMILIES:
        raise NetworkValidationError(f"unknown value family {family!r}")
    if not np.all(np.isfinite(arr)):
        raise NetworkValidationError("matrix contains non-finite values")
    if np.any(arr < 0):
        raise NetworkValidationError("out-of-family value: negative entry")
    if family == BINARY and not np.all((arr == 0) | (arr == 1)):
        raise NetworkValidationError("out-of-family value: binary network must be 0/1")
    if family == COUNT and not np.all(arr == np.floor(arr)):
        raise NetworkValidationError("out-of-family value: count network must be integer")
    if acyclic and np.any(np.diag(arr) != 0):
        raise NetworkValidationError("structural zero violated: nonzero diagonal")
    if not directed and not np.array_equal(arr, arr.T):
        raise NetworkValidationError("symmetry violated for undirected network")
    return Network(arr, directed=bool(directed), acyclic=bool(acyclic), family=family)


@dataclass
class NetworkCollection:
    """Networks observed over a shared set of actors, one kernel each."""

    networks: list
    kernel_specs: list
    actor_names: Optional[list] = None
    network_names: Optional[list] = field(default=None)

    def __post_init__(self):
        from .kernels import check_kernel_compatible

        if not self.networks:
            raise ValueError("a collection needs at least one network")
        sizes = {net.num_actors for net in self.networks}
        if len(sizes) != 1:
            raise ValueError(f"networks disagree on actor count: {sorted(sizes)}")
        if len(self.kernel_specs) != len(self.networks):
            raise ValueError("exactly one kernel spec per network is required")
        for net, spec in zip(self.networks, self.kernel_specs):
            check_kernel_compatible(net, spec)
        n = self.num_actors
        if self.actor_names is not None and len(self.actor_names) != n:
            raise ValueError("actor_names length does not match actor count")
        if self.network_names is None:
            self.network_names = [f"network_{j + 1}" for j in range(len(self.networks))]

    @property
    def num_actors(self) -> int:
        return self.networks[0].num_actors

    @property
    def num_networks(self) -> int:
        return len(self.networks)

    def __len__(self) -> int:
        return len(self.networks)


@dataclass(frozen=True)
class BlockStats:
    """Dyad counts and value sums per block.

    Directed networks use ordered blocks ``(k, l)``; undirected networks store
    the unordered block ``{k, l}`` at ``[min, max]`` and leave the lower
    triangle at zero.  ``log_fact`` holds sum of log(y!) per block (counts).
    """

    dyad_count: np.ndarray
    value_sum: np.ndarray
    log_fact: np.ndarray
    directed: bool

    @property
    def num_blocks(self) -> int:
        return self.dyad_count.shape[0]

    def diagonal(self):
        return np.diag(self.dyad_count).copy(), np.diag(self.value_sum).copy()

    def blocks(self):
        """Yield ``(k, l, n, s, log_fact)`` for every modelled block (0-based)."""
        K = self.num_blocks
        for k in range(K):
            for l in range(K):
                if not self.directed and l < k:
                    continue
                yield (k, l, int(self.dyad_count[k, l]), float(self.value_sum[k, l]),
                       float(self.log_fact[k, l]))


def block_sufficient_stats(network: Network, partition: Partition) -> BlockStats:
    if len(partition) != network.num_actors:
        raise ValueError(
            f"partition length {len(partition)} != actor count {network.num_actors}")
    lab = partition.as_array()
    K = partition.num_blocks
    mask = network.dyad_mask()
    rows, cols = np.nonzero(mask)
    vals = network.values[rows, cols]
    bk, bl = lab[rows], lab[cols]
    if not network.directed:
        bk, bl = np.minimum(bk, bl), np.maximum(bk, bl)
    flat = bk * K + bl
    n = np.bincount(flat, minlength=K * K).reshape(K, K)
    s = np.bincount(flat, weights=vals, minlength=K * K).reshape(K, K)
    if network.family == COUNT:
        lf = np.bincount(flat, weights=gammaln(vals + 1.0), minlength=K * K).reshape(K, K)
    else:
        lf = np.zeros((K, K))
    return BlockStats(n.astype(np.int64), s, lf, network.directed)


def degree_sequence(network: Network):
    """Degrees excluding self-loops; ``(in_degree, out_degree)`` when directed."""
    vals = network.values.copy()
    np.fill_diagonal(vals, 0.0)
    if network.directed:
        return vals.sum(axis=0), vals.sum(axis=1)
    return vals.sum(axis=1)


def clustering_coefficient(network: Network) -> float:
    """Global clustering coefficient 3 * triangles / connected triples.

    Returns 0 when the graph has no connected triple.
    """
    if network.directed or network.family != BINARY:
        raise ValueError("clustering coefficient needs an undirected binary network")
    return clustering_from_adjacency(network.values)


def clustering_from_adjacency(adj: np.ndarray) -> float:
    a = np.array(adj, dtype=float)
    np.fill_diagonal(a, 0.0)
    deg = a.sum(axis=1)
    triples = float((deg * (deg - 1.0)).sum() / 2.0)
    if triples == 0.0:
        return 0.0
    closed = float(np.einsum("ij,jk,ki->", a, a, a))  # 6 * triangles
    return (closed / 2.0) / triples
