"""Synthetic collections with planted network clusters and actor factions."""
from __future__ import annotations

import numpy as np

from .analytics import simulate_adjacency
from .io import _hyper_from_json
from .kernels import BERNOULLI_BETA, POISSON_GAMMA, KernelSpec, PointMass, default_kernel
from .network import BINARY, COUNT, NetworkCollection, Partition, validate_network, canonical_labels
from .partition import PitmanYorParams, sample_partition


def _blocks(sizes):
    return [k + 1 for k, m in enumerate(sizes) for _ in range(m)]


def seven_network_config() -> dict:
    """Seven networks on 21 actors in four planted groups: (1,6), (2,5,7), (3), (4).

    Networks 1-4 are binary undirected, 5 is a count network, 6 and 7 are
    binary directed.  Each group has its own faction structure.
    """
    I = 21
    strong = {"theta_D": 0.85, "theta_O": 0.05}
    return {
        "num_actors": I,
        "groups": [
            {"networks": [1, 6], "xi": _blocks([7, 7, 7])},
            {"networks": [2, 5, 7], "xi": [1 + (i % 2) for i in range(I)]},
            {"networks": [3], "xi": [1 + (i // 3) % 3 for i in range(I)]},
            {"networks": [4], "xi": [1 + (i % 3 == 0) for i in range(I)]},
        ],
        "networks": [
            {"name": "net1", "directed": False, **strong},
            {"name": "net2", "directed": False, **strong},
            {"name": "net3", "directed": False, **strong},
            {"name": "net4", "directed": False, **strong},
            {"name": "net5", "directed": False, "kernel": POISSON_GAMMA,
             "theta_D": 6.0, "theta_O": 0.5, "fit_lambda_D": [1.0, 0.2], "fit_lambda_O": [1.0, 0.2]},
            {"name": "net6", "directed": True, **strong},
            {"name": "net7", "directed": True, **strong},
        ],
    }


def _network_kernel(ent: dict) -> KernelSpec:
    fam = ent.get("kernel", BERNOULLI_BETA)
    if "theta_D" in ent or "theta_O" in ent:
        return KernelSpec(fam, PointMass(float(ent["theta_D"])), PointMass(float(ent["theta_O"])))
    return KernelSpec(fam, _hyper_from_json(ent.get("lambda_D", [1.0, 1.0])),
                      _hyper_from_json(ent.get("lambda_O", [1.0, 1.0])))


def simulate_collection(config: dict, rng: np.random.Generator):
    """Returns (collection, truth) where truth holds the planted zeta and per-group xi."""
    I = int(config["num_actors"])
    if I < 1:
        raise ValueError("num_actors must be positive")
    nets_cfg = config["networks"]
    J = len(nets_cfg)
    if J < 1:
        raise ValueError("config lists no networks")
    zeta = [0] * J
    group_xi = []
    for g, grp in enumerate(config["groups"], start=1):
        if "xi" in grp:
            xi = Partition.from_labels(grp["xi"])
            if xi.n != I:
                raise ValueError(f"group {g}: xi has length {xi.n}, expected {I}")
        else:
            pyp = grp.get("pyp", {})
            xi = sample_partition(I, PitmanYorParams(pyp.get("alpha", 0.0), pyp.get("beta", 1.0)), rng)
        group_xi.append(xi)
        for j in grp["networks"]:
            if not (1 <= j <= J) or zeta[j - 1]:
                raise ValueError(f"group {g}: network {j} is out of range or already grouped")
            zeta[j - 1] = g
    if 0 in zeta:
        raise ValueError(f"networks {[j + 1 for j, z in enumerate(zeta) if z == 0]} belong to no group")
    networks, fit_specs, names = [], [], []
    for j, ent in enumerate(nets_cfg):
        kernel = _network_kernel(ent)
        directed = bool(ent.get("directed", False))
        xi = group_xi[zeta[j] - 1]
        y, _, _ = simulate_adjacency(I, PitmanYorParams(), kernel, directed, rng, labels=xi.labels)
        fam = BINARY if kernel.family == BERNOULLI_BETA else COUNT
        networks.append(validate_network(y, directed, True, fam))
        base = default_kernel(fam)
        fit_specs.append(KernelSpec(kernel.family,
                                    _hyper_from_json(ent.get("fit_lambda_D")) or base.lambda_D,
                                    _hyper_from_json(ent.get("fit_lambda_O")) or base.lambda_O))
        names.append(ent.get("name", f"network_{j + 1}"))
    coll = NetworkCollection(networks, fit_specs, config.get("actor_names"), names)
    truth = {"zeta": list(canonical_labels(zeta)),
             "xi": [list(x.labels) for x in group_xi],
             "network_factions": [list(group_xi[z - 1].labels) for z in zeta]}
    return coll, truth
