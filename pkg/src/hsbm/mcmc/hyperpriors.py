"""Hyperpriors and random-walk updates on transformed coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import gamma as gamma_dist


@dataclass(frozen=True)
class Hyperpriors:
    """alpha ~ Uniform(0, alpha_max); beta ~ Gamma(shape, rate); kernel a, b ~ Gamma(shape, rate)."""

    alpha_max: float = 0.95
    beta_shape: float = 1.0
    beta_rate: float = 0.5
    kernel_shape: float = 1.0
    kernel_rate: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.alpha_max < 1.0):
            raise ValueError("alpha_max must lie in (0, 1)")
        for name in ("beta_shape", "beta_rate", "kernel_shape", "kernel_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def log_alpha(self, alpha: float) -> float:
        return -math.log(self.alpha_max) if 0.0 <= alpha < self.alpha_max else -math.inf

    def log_beta(self, beta: float) -> float:
        return _log_gamma_pdf(beta, self.beta_shape, self.beta_rate)

    def log_kernel(self, x: float) -> float:
        return _log_gamma_pdf(x, self.kernel_shape, self.kernel_rate)

    def draw_alpha(self, rng) -> float:
        return float(rng.uniform(0.0, self.alpha_max))

    def draw_beta(self, rng) -> float:
        return float(rng.gamma(self.beta_shape, 1.0 / self.beta_rate))


def _log_gamma_pdf(x, shape, rate):
    if x <= 0:
        return -math.inf
    return float(gamma_dist.logpdf(x, shape, scale=1.0 / rate))


def rw_alpha(alpha: float, alpha_max: float, step: float, rng) -> tuple[float, float]:
    """Propose on logit(alpha / alpha_max); returns (proposal, log Jacobian ratio)."""
    s = min(max(alpha / alpha_max, 1e-300), 1 - 1e-16)
    u = math.log(s) - math.log1p(-s) + step * rng.standard_normal()
    s_new = 1.0 / (1.0 + math.exp(-u))
    new = alpha_max * s_new
    log_jac = (math.log(s_new) + math.log1p(-s_new)) - (math.log(s) + math.log1p(-s))
    return new, log_jac


def rw_positive(x: float, step: float, rng) -> tuple[float, float]:
    """Propose on log(x); returns (proposal, log Jacobian ratio)."""
    new = x * math.exp(step * rng.standard_normal())
    return new, math.log(new) - math.log(x)
