"""Conjugate observation kernels: Bernoulli-Beta and Poisson-Gamma.

Gamma priors use the rate parameterisation, ``Gamma(a, rate b)`` with mean a/b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import betaln, gammaln

from .network import BINARY, COUNT, Network, Partition, block_sufficient_stats

BERNOULLI_BETA = "bernoulli-beta"
POISSON_GAMMA = "poisson-gamma"
KERNEL_FAMILIES = (BERNOULLI_BETA, POISSON_GAMMA)
_VALUE_FAMILY = {BERNOULLI_BETA: BINARY, POISSON_GAMMA: COUNT}


@dataclass(frozen=True)
class PointMass:
    """Degenerate prior on a block parameter; used by prior studies only."""

    value: float

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("point mass must be a finite non-negative value")


Hyper = Union[tuple, PointMass]


def _check_pair(pair, name):
    if isinstance(pair, PointMass):
        return pair
    a, b = (float(x) for x in pair)
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"{name} hyperparameters must be positive, got {(a, b)}")
    return (a, b)


@dataclass(frozen=True)
class KernelSpec:
    family: str = BERNOULLI_BETA
    lambda_D: Hyper = (1.0, 1.0)
    lambda_O: Hyper = (1.0, 1.0)

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "lambda_D", _check_pair(self.lambda_D, "lambda_D"))
        object.__setattr__(self, "lambda_O", _check_pair(self.lambda_O, "lambda_O"))
        if self.family == BERNOULLI_BETA:
            for h in (self.lambda_D, self.lambda_O):
                if isinstance(h, PointMass) and h.value > 1:
                    raise ValueError("Bernoulli point mass must lie in [0, 1]")

    @property
    def value_family(self) -> str:
        return _VALUE_FAMILY[self.family]

    @property
    def conjugate(self) -> bool:
        return not (isinstance(self.lambda_D, PointMass) or isinstance(self.lambda_O, PointMass))

    def as_vector(self) -> np.ndarray:
        """(a_D, b_D, a_O, b_O); only defined for conjugate specs."""
        if not self.conjugate:
            raise ValueError("point-mass kernels have no hyperparameter vector")
        return np.array([*self.lambda_D, *self.lambda_O], dtype=float)


def default_kernel(value_family: str) -> KernelSpec:
    return KernelSpec(BERNOULLI_BETA if value_family == BINARY else POISSON_GAMMA)


def check_kernel_compatible(network: Network, spec: KernelSpec) -> None:
    if spec.value_family != network.family:
        raise ValueError(
            f"kernel {spec.family} is incompatible with a {network.family} network")


def prior_moment(hyper: Hyper, family: str, order: int) -> float:
    """E[theta^order] under Beta(a, b), Gamma(a, rate b) or a point mass."""
    if int(order) != order or order < 0:
        raise ValueError(f"unsupported moment order {order}")
    order = int(order)
    if family not in KERNEL_FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}")
    if isinstance(hyper, PointMass):
        return float(hyper.value) ** order
    a, b = hyper
    r = np.arange(order, dtype=float)
    if family == BERNOULLI_BETA:
        return float(np.prod((a + r) / (a + b + r)))
    return float(np.prod((a + r) / b))


def prior_mean(hyper: Hyper, family: str) -> float:
    return prior_moment(hyper, family, 1)


def _check_stats(n, s, family):
    if n < 0 or s < 0:
        raise ValueError(f"invalid block stats n={n}, s={s}")
    if family == BERNOULLI_BETA and s > n:
        raise ValueError(f"binary block has s={s} > n={n}")


def block_log_marginal(n: int, s: float, hyper, family: str, log_fact: float = 0.0) -> float:
    """Log marginal likelihood of a block of ``n`` dyads summing to ``s``.

    ``log_fact`` is sum of log(y!) over the block's dyads (count data only).
    """
    _check_stats(n, s, family)
    if n == 0:
        return 0.0
    a, b = hyper
    if family == BERNOULLI_BETA:
        return float(betaln(a + s, b + n - s) - betaln(a, b))
    return float(gammaln(a + s) - gammaln(a) + a * math.log(b)
                 - (a + s) * math.log(b + n) - log_fact)


def block_log_predictive(new, old, hyper, family: str) -> float:
    """log p(new | old) for stats tuples ``(n, s[, log_fact])``."""
    n1, s1, lf1 = (tuple(new) + (0.0,))[:3]
    n0, s0, lf0 = (tuple(old) + (0.0,))[:3]
    _check_stats(n1, s1, family)
    _check_stats(n0, s0, family)
    return (block_log_marginal(n0 + n1, s0 + s1, hyper, family, lf0 + lf1)
            - block_log_marginal(n0, s0, hyper, family, lf0))


def block_log_marginal_array(n, s, hyper, family: str):
    """Vectorised block marginal without the log(y!) term."""
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    a, b = hyper
    if family == BERNOULLI_BETA:
        return betaln(a + s, b + n - s) - betaln(a, b)
    return gammaln(a + s) - gammaln(a) + a * np.log(b) - (a + s) * np.log(b + n)


def network_log_marginal(network: Network, partition: Partition, spec: KernelSpec) -> float:
    """log p(Y | partition) with block parameters integrated out."""
    check_kernel_compatible(network, spec)
    stats = block_sufficient_stats(network, partition)
    total = 0.0
    for k, l, n, s, lf in stats.blocks():
        hyper = spec.lambda_D if k == l else spec.lambda_O
        total += block_log_marginal(n, s, hyper, spec.family, lf)
    return total


def sample_theta_posterior(n: int, s: float, hyper, family: str,
                           rng: np.random.Generator) -> float:
    _check_stats(n, s, family)
    a, b = hyper
    if family == BERNOULLI_BETA:
        return float(rng.beta(a + s, b + n - s))
    return float(rng.gamma(a + s, 1.0 / (b + n)))


def sample_theta_prior(hyper, family: str, rng: np.random.Generator, size=None):
    if isinstance(hyper, PointMass):
        return hyper.value if size is None else np.full(size, hyper.value)
    a, b = hyper
    if family == BERNOULLI_BETA:
        return rng.beta(a, b, size=size)
    return rng.gamma(a, 1.0 / b, size=size)
