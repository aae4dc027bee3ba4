from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

from .hyperpriors import Hyperpriors


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 2000
    burn_in: int = 500
    thinning: int = 1
    seed: int = 0
    # moves per iteration
    zeta_sweeps: int = 1
    split_merge: int = 1
    xi_sweeps: int = 1
    launch_sweeps: int = 2
    # initial values
    alpha1: float = 0.0
    beta1: float = 1.0
    alpha2: float = 0.0
    beta2: float = 1.0
    # which hyperparameters are sampled (the rest stay at their initial values)
    sample_alpha1: bool = False
    sample_beta1: bool = True
    sample_alpha2: bool = False
    sample_beta2: bool = True
    sample_lambda: bool = False
    # random-walk step sizes on logit(alpha) / log(beta) / log(kernel hyperparameter)
    step_alpha: float = 0.5
    step_beta: float = 0.5
    step_lambda: float = 0.3
    hyperpriors: Hyperpriors = field(default_factory=Hyperpriors)
    init_zeta: str = "singletons"
    progress_every: int = 0
    audit_every: int = 100

    def __post_init__(self):
        for name in ("iterations", "thinning"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not (0 <= self.burn_in < self.iterations):
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        for name in ("zeta_sweeps", "split_merge", "xi_sweeps", "launch_sweeps"):
            if int(getattr(self, name)) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.init_zeta not in ("singletons", "single"):
            raise ValueError("init_zeta must be 'singletons' or 'single'")
        for name in ("alpha1", "alpha2"):
            if not (0.0 <= getattr(self, name) < 1.0):
                raise ValueError(f"{name} must lie in [0, 1)")
        for name in ("beta1", "beta2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def num_retained(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thinning))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "McmcConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown MCMC config keys: {sorted(unknown)}")
        if isinstance(data.get("hyperpriors"), dict):
            data["hyperpriors"] = Hyperpriors(**data["hyperpriors"])
        return cls(**data)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
