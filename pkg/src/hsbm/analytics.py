"""Prior properties of blockmodels with separate diagonal/off-diagonal kernels.

Closed forms for the marginal link probability, degree mean and variance,
in/out-degree correlation, transitivity and assortativity, plus prior
predictive simulation used to check them by Monte Carlo.

The degree variance and the transitivity denominator are assembled from the
underlying conditioning argument rather than copied from the usual printed
displays: for three actors ``i, j, h``

* ``E[y_ij y_ih]`` = P(all same) E_D[t^2] + P(one pair) (2 E_D[t] E_O[t] + E_O[t^2])
  + P(all distinct) E_O[t]^2, because when ``j`` and ``h`` share a faction
  other than ``i``'s both dyads read the same off-diagonal block;
* ``Var(D_i) = (I-1) tbar (1 - tbar) + (I-1)(I-2) (E[y_ij y_ih] - tbar^2)``.

Both forms are verified against simulation in the test suite.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb

from .kernels import BERNOULLI_BETA, KernelSpec, PointMass, prior_moment, sample_theta_prior
from .network import Network, Partition, clustering_from_adjacency
from .partition import (PitmanYorParams, _crp_labels, co_cluster_prob, sample_faction_sizes,
                        triple_pattern_probs)


@dataclass(frozen=True)
class PriorSummary:
    theta_bar: float
    rho_bar: float
    kappa_bar: float
    delta_bar: float
    chi_bar: float
    upsilon: float

    def as_dict(self) -> dict:
        return asdict(self)


def _require_binary(kernel: KernelSpec):
    if kernel.family != BERNOULLI_BETA:
        raise ValueError("link-probability analytics need a binary (bernoulli-beta) kernel")


def _moments(kernel: KernelSpec, order: int):
    return (prior_moment(kernel.lambda_D, kernel.family, order),
            prior_moment(kernel.lambda_O, kernel.family, order))


def marginal_link_prob(params: PitmanYorParams, kernel: KernelSpec) -> float:
    _require_binary(kernel)
    p_same = co_cluster_prob(params)
    mD, mO = _moments(kernel, 1)
    return p_same * mD + (1.0 - p_same) * mO


def _wedge_moment(params: PitmanYorParams, kernel: KernelSpec) -> float:
    """E[y_ij y_ih] for two dyads sharing actor ``i``."""
    p3, p2, p0 = triple_pattern_probs(params)
    mD, mO = _moments(kernel, 1)
    sD, sO = _moments(kernel, 2)
    return p3 * sD + p2 * (2.0 * mD * mO + sO) + p0 * mO ** 2


def degree_moments(I: int, params: PitmanYorParams, kernel: KernelSpec) -> tuple[float, float]:
    """Prior mean and variance of an actor's degree in an undirected binary network."""
    if I < 1:
        raise ValueError("I must be a positive integer")
    tbar = marginal_link_prob(params, kernel)
    rho = (I - 1) * tbar
    kappa = (I - 1) * tbar * (1.0 - tbar) + \
        (I - 1) * (I - 2) * (_wedge_moment(params, kernel) - tbar ** 2)
    return rho, kappa


def inout_degree_correlation(params: PitmanYorParams, kernel: KernelSpec) -> float:
    """Cor(y_ij, y_ji), equal to the in/out-degree correlation of an actor."""
    tbar = marginal_link_prob(params, kernel)
    p_same = co_cluster_prob(params)
    sD, _ = _moments(kernel, 2)
    _, mO = _moments(kernel, 1)
    num = p_same * sD + (1.0 - p_same) * mO ** 2 - tbar ** 2
    den = tbar * (1.0 - tbar)
    return num / den if den > 0 else 0.0


def transitivity_components(params: PitmanYorParams, kernel: KernelSpec) -> tuple[float, float]:
    """P(triangle) and P(two edges of a triangle sharing a vertex)."""
    _require_binary(kernel)
    p3, p2, p0 = triple_pattern_probs(params)
    mD, mO = _moments(kernel, 1)
    sD, sO = _moments(kernel, 2)
    cD, _ = _moments(kernel, 3)
    num = p3 * cD + 3.0 * p2 * mD * sO + p0 * mO ** 3
    return num, _wedge_moment(params, kernel)


def transitivity_index(params: PitmanYorParams, kernel: KernelSpec) -> float:
    """P(y_ij = 1 | y_ih = 1, y_jh = 1)."""
    num, den = transitivity_components(params, kernel)
    return num / den if den > 0 else 0.0


def assortativity_index(lambda_D, lambda_O, family: str = BERNOULLI_BETA) -> float:
    return math.log(prior_moment(lambda_D, family, 1)) - math.log(prior_moment(lambda_O, family, 1))


def prior_summary(I: int, params: PitmanYorParams, kernel: KernelSpec) -> PriorSummary:
    tbar = marginal_link_prob(params, kernel)
    rho, kappa = degree_moments(I, params, kernel)
    return PriorSummary(
        theta_bar=tbar, rho_bar=rho, kappa_bar=kappa,
        delta_bar=inout_degree_correlation(params, kernel),
        chi_bar=transitivity_index(params, kernel),
        upsilon=assortativity_index(kernel.lambda_D, kernel.lambda_O, kernel.family),
    )


def _bracket(m: int, moments: np.ndarray, z: float) -> float:
    s = np.arange(1, m + 1)
    return 1.0 + float((comb(m, s) * moments[1:m + 1] * z ** s).sum())


def degree_mgf(t: float, I: int, params: PitmanYorParams, kernel: KernelSpec,
               n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate (and standard error) of E[exp(t D_1)].

    Faction sizes are drawn from the prior; the expectation over the block
    parameters is done exactly through their moments.
    """
    _require_binary(kernel)
    mD = np.array([prior_moment(kernel.lambda_D, kernel.family, s) for s in range(I + 1)])
    mO = np.array([prior_moment(kernel.lambda_O, kernel.family, s) for s in range(I + 1)])
    z = math.expm1(t)
    vals = np.empty(n_samples)
    for r in range(n_samples):
        K, sizes = sample_faction_sizes(I, params, rng)
        v = _bracket(sizes[0] - 1, mD, z)
        for m in sizes[1:]:
            v *= _bracket(m, mO, z)
        vals[r] = v
    se = float(vals.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return float(vals.mean()), se


def simulate_adjacency(I: int, params: PitmanYorParams, kernel: KernelSpec, directed: bool,
                       rng: np.random.Generator, labels: Optional[Sequence[int]] = None):
    """Raw prior-predictive draw: (adjacency, 0-based labels, theta matrix)."""
    lab = np.asarray(_crp_labels(I, params, rng) if labels is None else labels) - 1
    K = int(lab.max()) + 1
    theta = np.empty((K, K))
    off = sample_theta_prior(kernel.lambda_O, kernel.family, rng, size=(K, K))
    theta[:] = off
    if not directed:
        theta = np.triu(theta) + np.triu(theta, 1).T
    diag = sample_theta_prior(kernel.lambda_D, kernel.family, rng, size=K)
    theta[np.arange(K), np.arange(K)] = diag
    rates = theta[lab][:, lab]
    if kernel.family == BERNOULLI_BETA:
        y = (rng.random((I, I)) < rates).astype(float)
    else:
        y = rng.poisson(rates).astype(float)
    np.fill_diagonal(y, 0.0)
    if not directed:
        y = np.triu(y, 1)
        y = y + y.T
    return y, lab, theta


def simulate_network(I: int, params: PitmanYorParams, kernel: KernelSpec, directed: bool,
                     rng: np.random.Generator):
    """Draw (Network, true faction partition, Theta) from the prior predictive."""
    y, lab, theta = simulate_adjacency(I, params, kernel, directed, rng)
    net = Network(y, directed=directed, acyclic=True, family=kernel.value_family)
    return net, Partition.from_labels(lab), theta


# --- Monte Carlo studies -------------------------------------------------

def mean_and_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def ratio_and_se(num, den) -> tuple[float, float]:
    """Ratio of means with a delta-method standard error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = num.size
    r = num.mean() / den.mean()
    resid = num - r * den
    se = math.sqrt(resid.var(ddof=1) / n) / abs(den.mean())
    return float(r), float(se)


def single_component_kernel(params: PitmanYorParams, kernel: KernelSpec) -> KernelSpec:
    """One-faction comparison model with the same marginal link probability.

    Point-mass cells use a point mass at theta-bar; Beta cells keep the
    diagonal prior's concentration ``a_D + b_D``.
    """
    tbar = marginal_link_prob(params, kernel)
    if isinstance(kernel.lambda_D, PointMass):
        h = PointMass(tbar)
    else:
        c = sum(kernel.lambda_D)
        h = (tbar * c, (1.0 - tbar) * c)
    return KernelSpec(BERNOULLI_BETA, h, h)


@dataclass(frozen=True)
class StudyCell:
    params: PitmanYorParams
    kernel: KernelSpec
    I: int = 100
    replicates: int = 2000
    label: str = ""


def _cell_seed(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _run_cell(args):
    cell, seed, index = args
    if cell.replicates < 1:
        raise ValueError("replicate count must be positive")
    rng = _cell_seed(seed, index)
    I = cell.I
    surv = np.empty((cell.replicates, I))
    clus = np.empty(cell.replicates)
    base = np.empty(cell.replicates)
    ks = np.arange(I)
    sck = single_component_kernel(cell.params, cell.kernel)
    one = np.ones(I, dtype=int)
    for r in range(cell.replicates):
        y, _, _ = simulate_adjacency(I, cell.params, cell.kernel, False, rng)
        deg = y.sum(axis=1)
        surv[r] = (deg[:, None] >= ks[None, :]).mean(axis=0)
        clus[r] = clustering_from_adjacency(y)
        yb, _, _ = simulate_adjacency(I, cell.params, sck, False, rng, labels=one)
        base[r] = clustering_from_adjacency(yb)
    return surv, clus, base


@dataclass
class StudyResult:
    cells: list
    survival_mean: list        # per cell, array over k
    survival_se: list
    clustering: list           # per cell (mean, se)
    baseline: list             # per cell (mean, se) for the single-component model
    summaries: list            # per cell PriorSummary

    def stat_rows(self) -> list[dict]:
        rows = []
        for c, (cell, cl, bl, summ) in enumerate(zip(self.cells, self.clustering, self.baseline,
                                                     self.summaries)):
            base = {"cell": c, "label": cell.label, "alpha": cell.params.alpha,
                    "beta": cell.params.beta, "I": cell.I, "replicates": cell.replicates}
            rows.append({**base, "statistic": "mean_clustering", "estimate": cl[0], "se": cl[1]})
            rows.append({**base, "statistic": "single_component_clustering",
                         "estimate": bl[0], "se": bl[1]})
            for name, val in summ.as_dict().items():
                rows.append({**base, "statistic": name, "estimate": val, "se": 0.0})
        return rows

    def survival_rows(self) -> list[dict]:
        rows = []
        for c, (cell, m, s) in enumerate(zip(self.cells, self.survival_mean, self.survival_se)):
            for k in range(m.size):
                rows.append({"cell": c, "label": cell.label, "alpha": cell.params.alpha,
                             "beta": cell.params.beta, "k": k, "survival": float(m[k]),
                             "se": float(s[k])})
        return rows


def property_study(grid: Sequence[StudyCell], seed: int = 0, n_jobs: int = 1) -> StudyResult:
    """Degree survival curves and clustering coefficients per grid cell.

    Each cell draws from its own stream seeded by ``(seed, cell index)`` so the
    result does not depend on ``n_jobs``.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid must contain at least one cell")
    for cell in grid:
        _require_binary(cell.kernel)
        if cell.replicates < 2:
            raise ValueError("replicate count must be at least 2")
    tasks = [(cell, seed, i) for i, cell in enumerate(grid)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            outs = list(ex.map(_run_cell, tasks))
    else:
        outs = [_run_cell(t) for t in tasks]
    res = StudyResult(grid, [], [], [], [], [])
    for cell, (surv, clus, base) in zip(grid, outs):
        n = surv.shape[0]
        res.survival_mean.append(surv.mean(axis=0))
        res.survival_se.append(surv.std(axis=0, ddof=1) / math.sqrt(n))
        res.clustering.append(mean_and_se(clus))
        res.baseline.append(mean_and_se(base))
        res.summaries.append(prior_summary(cell.I, cell.params, cell.kernel))
    return res
