"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

import numbers

import numpy as np

from .kernels import default_kernel
from .network import BINARY, COUNT, Network, NetworkCollection, validate_network


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_seed(seed) -> int:
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_collection(X, directed=False, acyclic=True, family=None) -> NetworkCollection:
    """Accept a collection, a list of Networks, or a (J, I, I) / (I, I) array-like.

    For raw matrices ``directed``/``acyclic``/``family`` may be scalars or
    one value per network; the family is inferred (binary if every entry is
    0/1) when not given.
    """
    if isinstance(X, NetworkCollection):
        return X
    if isinstance(X, Network):
        X = [X]
    if isinstance(X, (list, tuple)) and X and all(isinstance(n, Network) for n in X):
        return NetworkCollection(list(X), [default_kernel(n.family) for n in X])
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a stack of square matrices, got shape {arr.shape}")
    J = arr.shape[0]

    def per_net(v, name):
        if np.ndim(v) == 0:
            return [v] * J
        v = list(v)
        if len(v) != J:
            raise ValueError(f"{name} needs one value per network ({J})")
        return v

    dirs, acs, fams = per_net(directed, "directed"), per_net(acyclic, "acyclic"), per_net(family, "family")
    nets = []
    for y, d, a, f in zip(arr, dirs, acs, fams):
        if f is None:
            f = BINARY if np.all((y == 0) | (y == 1)) else COUNT
        nets.append(validate_network(y, bool(d), bool(a), f))
    return NetworkCollection(nets, [default_kernel(n.family) for n in nets])
