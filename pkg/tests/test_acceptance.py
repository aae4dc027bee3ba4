"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are listed
under "acceptance criteria" at the end of the session.
"""
import functools
import itertools
import math

import numpy as np
import pytest

from hsbm.analytics import (StudyCell, degree_moments, inout_degree_correlation,
                            marginal_link_prob, mean_and_se, property_study, ratio_and_se,
                            simulate_adjacency, transitivity_index)
from hsbm.kernels import KernelSpec, PointMass, prior_moment
from hsbm.mcmc import McmcConfig, run_chain, run_chains
from hsbm.network import Partition
from hsbm.partition import (PitmanYorParams, _crp_labels, co_cluster_prob, eppf_log_prob,
                            seating_log_prob, triple_pattern_probs)
from hsbm.simulate import seven_network_config, simulate_collection
from hsbm.summaries import network_incidence, point_estimate, zeta_point_estimate

from conftest import ACCEPTANCE_LINES, two_block_pair
from oracles import exact_posterior

pytestmark = pytest.mark.slow


def criterion(number, title):
    """Record a PASS/FAIL line for the wrapped test, whatever the outcome."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as e:
                line = f"criterion {number:2d} FAIL  {title}: {type(e).__name__}: {e}"
                ACCEPTANCE_LINES.append(line.splitlines()[0])
                print(line)
                raise
            line = f"criterion {number:2d} PASS  {title}: {detail}"
            ACCEPTANCE_LINES.append(line)
            print(line)
        return run
    return wrap


def within(x, target, se, k=3.0):
    return abs(x - target) <= k * se


# --- 1 -------------------------------------------------------------------------

@criterion(1, "seating-path product equals the EPPF")
def test_criterion_01_eppf_sequential_consistency():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        alpha = float(rng.uniform(0, 0.95))
        beta = float(rng.uniform(1e-3, 10))
        part = Partition.from_labels(rng.integers(0, n, n))
        params = PitmanYorParams(alpha, beta)
        order = rng.permutation(n)
        p_seq = math.exp(seating_log_prob(part, params, order))
        p_eppf = math.exp(eppf_log_prob(part, params))
        worst = max(worst, abs(p_seq - p_eppf))
    assert worst <= 1e-10, worst
    return f"1000 cases, max |difference| = {worst:.2e}"


# --- 2 -------------------------------------------------------------------------

@criterion(2, "prior pair, triple and occupancy identities")
def test_criterion_02_prior_identities():
    rng = np.random.default_rng(202)
    n = 100_000
    worst = 0.0
    for alpha, beta, I in itertools.product((0.0, 0.5), (0.5, 5.0), (3, 10, 50)):
        params = PitmanYorParams(alpha, beta)
        lab = np.array([_crp_labels(I, params, rng) for _ in range(n)])
        pair = (lab[:, 0] == lab[:, 1]).astype(float)
        all3 = (pair == 1) & (lab[:, 1] == lab[:, 2])
        only12 = (pair == 1) & (lab[:, 0] != lab[:, 2])
        apart = (lab[:, 0] != lab[:, 1]) & (lab[:, 0] != lab[:, 2]) & (lab[:, 1] != lab[:, 2])
        occ = np.array([(np.bincount(r) ** 2).sum() for r in lab]) / I
        p3, p2, p0 = triple_pattern_probs(params)
        checks = [(pair, co_cluster_prob(params)), (all3, p3), (only12, p2), (apart, p0),
                  (occ, 1 + (I - 1) * (1 - alpha) / (beta + 1))]
        for x, target in checks:
            m, se = mean_and_se(x)
            z = abs(m - target) / se if se > 0 else (0.0 if m == target else math.inf)
            assert z <= 3, (alpha, beta, I, target, m, se)
            worst = max(worst, z)
    return f"12 settings x 5 identities, 1e5 partitions each, max |z| = {worst:.2f}"


# --- 3, 4, 5: shared prior-predictive simulations --------------------------------

SWEEP = [
    (PitmanYorParams(0.0, 1.0), KernelSpec("bernoulli-beta", (2, 1), (1, 2))),
    (PitmanYorParams(0.5, 0.5), KernelSpec("bernoulli-beta", (5, 1), (1, 5))),
    (PitmanYorParams(0.3, 5.0), KernelSpec("bernoulli-beta", (1, 1), (1, 3))),
    (PitmanYorParams(0.0, 0.5), KernelSpec("bernoulli-beta", (1, 4), (2, 2))),
    (PitmanYorParams(0.8, 2.0), KernelSpec("bernoulli-beta", (3, 3), (1, 9))),
    (PitmanYorParams(0.2, 10.0), KernelSpec("bernoulli-beta", (0.5, 0.5), (2, 1))),
]
THETA = 0.3
POINT = (PitmanYorParams(0.4, 1.0), KernelSpec("bernoulli-beta", PointMass(THETA), PointMass(THETA)))
I_SWEEP = 20
N_UNDIRECTED = 20_000
N_DIRECTED = 10_000


@functools.lru_cache(maxsize=None)
def undirected_stats(cell: int):
    params, kernel = (SWEEP + [POINT])[cell]
    rng = np.random.default_rng([303, cell])
    out = np.empty((N_UNDIRECTED, 4))
    for r in range(N_UNDIRECTED):
        y, _, _ = simulate_adjacency(I_SWEEP, params, kernel, False, rng)
        d = y.sum(axis=1)
        out[r] = d.mean(), (d ** 2).mean(), np.trace(y @ y @ y), (d * (d - 1)).sum()
    return out


@functools.lru_cache(maxsize=None)
def directed_stats(cell: int):
    params, kernel = (SWEEP + [POINT])[cell]
    rng = np.random.default_rng([404, cell])
    I = I_SWEEP
    off = I * (I - 1)
    out = np.empty((N_DIRECTED, 2))
    for r in range(N_DIRECTED):
        y, _, _ = simulate_adjacency(I, params, kernel, True, rng)
        out[r] = (y * y.T).sum() / off, y.sum() / off
    return out


@criterion(3, "link frequency matches theta-bar; min/max bound")
def test_criterion_03_link_probability():
    worst = 0.0
    for c, (params, kernel) in enumerate(SWEEP):
        tbar = marginal_link_prob(params, kernel)
        mD = prior_moment(kernel.lambda_D, kernel.family, 1)
        mO = prior_moment(kernel.lambda_O, kernel.family, 1)
        assert min(mD, mO) <= tbar <= max(mD, mO)
        m, se = mean_and_se(undirected_stats(c)[:, 0] / (I_SWEEP - 1))
        assert within(m, tbar, se), (c, m, tbar, se)
        worst = max(worst, abs(m - tbar) / se)
    return f"6 cells x {N_UNDIRECTED} networks (I={I_SWEEP}), max |z| = {worst:.2f}, bound holds"


def _degree_variance(stats):
    """Var(D_i) from per-network mean degree and mean squared degree, delta-method SE."""
    D, D2 = stats[:, 0], stats[:, 1]
    B = D.mean()
    grad = np.array([1.0, -2 * B])
    se = math.sqrt(grad @ np.cov(np.vstack([D2, D])) @ grad / len(D))
    return D2.mean() - B * B, se


def _reciprocity(stats):
    recip, dens = stats[:, 0], stats[:, 1]
    A, B = recip.mean(), dens.mean()
    v = B - B ** 2
    f = (A - B ** 2) / v
    g = np.array([1 / v, (-2 * B * v - (A - B ** 2) * (1 - 2 * B)) / v ** 2])
    return f, math.sqrt(g @ np.cov(np.vstack([recip, dens])) @ g / len(recip))


@criterion(4, "degree mean, degree variance and in/out correlation")
def test_criterion_04_degree_moments():
    worst = 0.0
    for c, (params, kernel) in enumerate(SWEEP + [POINT]):
        st = undirected_stats(c)
        rho, kappa = degree_moments(I_SWEEP, params, kernel)
        m, se = mean_and_se(st[:, 0])
        v, vse = _degree_variance(st)
        delta = inout_degree_correlation(params, kernel)
        f, fse = _reciprocity(directed_stats(c))
        for est, target, s in ((m, rho, se), (v, kappa, vse), (f, delta, fse)):
            assert within(est, target, s), (c, est, target, s)
            worst = max(worst, abs(est - target) / s)
    params, kernel = POINT
    rho, kappa = degree_moments(I_SWEEP, params, kernel)
    assert rho == pytest.approx((I_SWEEP - 1) * THETA, abs=1e-12)
    assert kappa == pytest.approx((I_SWEEP - 1) * THETA * (1 - THETA), abs=1e-12)
    assert inout_degree_correlation(params, kernel) == pytest.approx(0.0, abs=1e-12)
    return (f"7 cells (6 Beta + point mass), max |z| = {worst:.2f}; point mass gives "
            f"kappa = (I-1)theta(1-theta) and in/out correlation 0")


@criterion(5, "triangle closure frequency matches chi-bar")
def test_criterion_05_transitivity():
    worst = 0.0
    for c, (params, kernel) in enumerate(SWEEP + [POINT]):
        st = undirected_stats(c)
        chi, se = ratio_and_se(st[:, 2], st[:, 3])
        target = transitivity_index(params, kernel)
        assert within(chi, target, se), (c, chi, target, se)
        worst = max(worst, abs(chi - target) / se)
    assert transitivity_index(*POINT) == pytest.approx(THETA, abs=1e-12)
    return f"7 cells, max |z| = {worst:.2f}; point mass gives chi = theta"


# --- 6, 7: property studies at I = 100 --------------------------------------------

@criterion(6, "degree survival invariant to the partition prior")
def test_criterion_06_degree_invariance():
    kernel = KernelSpec("bernoulli-beta", PointMass(0.1), PointMass(0.1))
    cells = [StudyCell(PitmanYorParams(a, b), kernel, 100, 2000)
             for a, b in itertools.product((0.0, 0.8), (0.5, 5.0))]
    res = property_study(cells, seed=606)
    worst = 0.0
    for p, q in itertools.combinations(range(len(cells)), 2):
        gap = np.abs(res.survival_mean[p] - res.survival_mean[q])
        pooled = np.hypot(res.survival_se[p], res.survival_se[q])
        ok = gap <= 3 * pooled
        assert ok.all(), (p, q, int(np.argmin(ok)))
        live = pooled > 0
        if live.any():
            worst = max(worst, float((gap[live] / pooled[live]).max()))
    return f"4 cells x 2000 networks (I=100), max gap = {worst:.2f} pooled SE"


@criterion(7, "assortative clustering exceeds theta-bar; baseline does not")
def test_criterion_07_clustering_direction():
    params = PitmanYorParams(0.0, 0.5)
    kernel = KernelSpec("bernoulli-beta", PointMass(0.8), PointMass(0.2))
    res = property_study([StudyCell(params, kernel, 100, 2000)], seed=707)
    tbar = marginal_link_prob(params, kernel)
    (c, c_se), (b, b_se) = res.clustering[0], res.baseline[0]
    assert c - tbar >= 0.05, (c, tbar)
    assert within(b, tbar, b_se), (b, tbar, b_se)
    return (f"theta-bar = {tbar:.4f}, mean C = {c:.4f} (+{c - tbar:.4f}), "
            f"single-component C = {b:.4f} +/- {b_se:.4f}")


# --- 8: exact posterior -------------------------------------------------------------

@criterion(8, "sampler matches brute-force posterior co-clustering")
def test_criterion_08_exact_posterior():
    coll = two_block_pair()
    D, A, _ = exact_posterior(coll, 0.0, 1.0, 0.0, 1.0)
    parts = []
    for name, sm in (("gibbs-only", 0), ("split-merge", 1)):
        cfg = McmcConfig(iterations=50_000, burn_in=1000, split_merge=sm, seed=808,
                         sample_beta1=False, sample_beta2=False)
        tr = run_chain(coll, cfg)
        Dm = network_incidence(tr)
        err = float(np.abs(Dm - D).max())
        for j in range(coll.num_networks):
            lab = np.array([r.xi_for_network(j) for r in tr])
            Am = (lab[:, :, None] == lab[:, None, :]).mean(axis=0)
            err = max(err, float(np.abs(Am - A[j]).max()))
        assert err <= 0.02, (name, err)
        parts.append(f"{name} max error {err:.4f}")
    return f"P(networks together) = {D[0, 1]:.4f}; " + ", ".join(parts)


# --- 9: planted recovery ----------------------------------------------------------

@criterion(9, "planted network groups recovered")
def test_criterion_09_seven_network_recovery():
    coll, truth = simulate_collection(seven_network_config(), np.random.default_rng(909))
    tr = run_chain(coll, McmcConfig(iterations=3000, burn_in=1000, seed=909))
    D = network_incidence(tr)
    groups = [[0, 5], [1, 4, 6], [2], [3]]
    within_min = min(D[i, j] for g in groups for i, j in itertools.combinations(g, 2))
    assert within_min > 0.5, D
    est = zeta_point_estimate(tr, 1.0, 1.0).partition.labels
    assert est[0] == est[5] and est[1] == est[4] == est[6], est
    return f"min within-group incidence {within_min:.3f}, point estimate {list(est)}"


# --- 10: loss-weight limits --------------------------------------------------------

@criterion(10, "b=0 gives one cluster, a=0 gives singletons")
def test_criterion_10_point_estimate_limits():
    rng = np.random.default_rng(1010)
    cases = 0
    for n in (1, 2, 3, 5, 8, 12):
        for _ in range(25):
            labs = [rng.integers(0, max(1, n // 2) + 1, n) for _ in range(int(rng.integers(1, 20)))]
            D = np.mean([np.equal.outer(l, l) for l in labs], axis=0)
            assert point_estimate(D, a=1.0, b=0.0, candidates=labs).partition.num_blocks == 1
            assert point_estimate(D, a=0.0, b=1.0, candidates=labs).partition == Partition.singletons(n)
            cases += 1
    return f"{cases} incidence matrices"


# --- 11: determinism ---------------------------------------------------------------

@criterion(11, "identical seed, config and data give byte-identical traces")
def test_criterion_11_determinism(tmp_path):
    coll, _ = simulate_collection(seven_network_config(), np.random.default_rng(1111))
    cfg = McmcConfig(iterations=150, burn_in=50, seed=1111, sample_alpha1=True,
                     sample_alpha2=True, sample_lambda=True)
    paths = [[tmp_path / f"run{r}_chain{c}.jsonl" for c in range(2)] for r in range(2)]
    for ps in paths:
        run_chains(coll, cfg, 2, paths=ps)
    same = [paths[0][c].read_bytes() == paths[1][c].read_bytes() for c in range(2)]
    assert all(same)
    assert paths[0][0].read_bytes() != paths[0][1].read_bytes()
    return f"2 runs x 2 chains on the 7-network collection, {paths[0][0].stat().st_size} bytes per trace"
