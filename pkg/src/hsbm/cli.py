"""Command line: ``hsbm simulate | fit | analytics | summarize``.

Config documents
----------------
simulate::

    {"num_actors": 21,
     "groups": [{"networks": [1, 6], "xi": [1, 1, 2, ...]},      # or "pyp": {"alpha", "beta"}
                ...],
     "networks": [{"name": "net1", "directed": false, "kernel": "bernoulli-beta",
                   "theta_D": 0.85, "theta_O": 0.05,               # or "lambda_D"/"lambda_O"
                   "fit_lambda_D": [1, 1], "fit_lambda_O": [1, 1]}, ...]}

fit: any subset of the :class:`~hsbm.mcmc.McmcConfig` fields, e.g.
``{"iterations": 5000, "sample_lambda": true, "hyperpriors": {"beta_rate": 1.0}}``.

analytics: one evaluation ``{"I": 20, "alpha": 0, "beta": 1, "kernel": {...}}`` or a
study with ``"cells": [{"alpha", "beta", "kernel", "label"}, ...]`` (or a
``"grid"`` of ``alpha``/``beta``/``kernels`` lists) plus ``"I"`` and
``"replicates"``.  Kernels are ``{"kernel": family, "lambda_D": [a, b] | {"point": v},
"lambda_O": ...}``.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import check_seed
from .analytics import StudyCell, prior_summary, property_study
from .io import (FormatError, kernel_from_json, load_manifest, save_collection, write_json,
                 write_labeled_matrix, write_table)
from .kernels import BERNOULLI_BETA, KernelSpec
from .mcmc import McmcConfig, Trace, run_chains
from .network import BINARY, COUNT, NetworkValidationError
from .partition import PitmanYorParams
from .simulate import seven_network_config, simulate_collection
from .summaries import (actor_incidence, incidence_from_labels, network_incidence, point_estimate,
                        posterior_assortativity, zeta_point_estimate)

log = logging.getLogger("hsbm")

PRESETS = {"seven-networks": seven_network_config}


class CliError(Exception):
    pass


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"{path}: invalid JSON ({e})") from None


def _prepare_output(outdir, names, force: bool) -> Path:
    out = Path(outdir)
    if out.exists() and not out.is_dir():
        raise CliError(f"output path {out} exists and is not a directory")
    clash = [n for n in names if (out / n).exists()]
    if clash and not force:
        raise CliError(f"{out / clash[0]} already exists (use --force to overwrite)")
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise CliError("give exactly one of --config or --preset")
    cfg = PRESETS[args.preset]() if args.preset else _load_json(args.config)
    seed = check_seed(args.seed)
    try:
        coll, truth = simulate_collection(cfg, np.random.default_rng(seed))
    except (KeyError, TypeError) as e:
        raise CliError(f"invalid simulate config: {e}") from None
    names = [f"{n}.csv" for n in coll.network_names] + ["manifest.json", "truth.json"]
    out = _prepare_output(args.output, names, args.force)
    meta = {"tool": "hsbm", "version": __version__, "seed": seed, "config_digest": digest(cfg)}
    save_collection(coll, out, meta)
    write_json(out / "truth.json", {**truth, "meta": meta})
    print(out / "manifest.json")
    return 0


# --- fit ----------------------------------------------------------------------

def _fit_config(args) -> McmcConfig:
    doc = _load_json(args.config) if args.config else {}
    overrides = {"iterations": args.iterations, "burn_in": args.burn_in,
                 "thinning": args.thin, "seed": args.seed}
    for k, v in overrides.items():
        if v is not None:
            doc[k] = v
    if "seed" in doc:
        doc["seed"] = check_seed(doc["seed"])
    if "progress_every" not in doc:
        doc["progress_every"] = max(1, int(doc.get("iterations", McmcConfig.iterations)) // 10)
    try:
        return McmcConfig.from_dict(doc)
    except TypeError as e:
        raise CliError(f"invalid MCMC config: {e}") from None


def cmd_fit(args) -> int:
    coll = load_manifest(args.manifest)
    cfg = _fit_config(args)
    if args.chains < 1:
        raise CliError("--chains must be at least 1")
    files = ["trace.jsonl"] if args.chains == 1 else \
        [f"trace_chain{c + 1}.jsonl" for c in range(args.chains)]
    out = _prepare_output(args.output, files + ["fit.json"], args.force)
    traces = run_chains(coll, cfg, args.chains, args.jobs, [out / f for f in files])
    summary = {"tool": "hsbm", "version": __version__, "seed": cfg.seed,
               "config_digest": cfg.digest(), "config": cfg.to_dict(),
               "manifest": str(Path(args.manifest).resolve()), "traces": files,
               "chains": []}
    for f, tr in zip(files, traces):
        st = tr.stats
        rate = {m: (st[f"{m}_acc"] / st[f"{m}_prop"] if st[f"{m}_prop"] else None)
                for m in ("split", "merge")}
        summary["chains"].append({"trace": f, "records": len(tr), **st,
                                  "split_rate": rate["split"], "merge_rate": rate["merge"],
                                  "final_log_post": tr.records[-1].log_post if len(tr) else None})
        log.info("%s: %d records, split %d/%d, merge %d/%d accepted", f, len(tr),
                 st["split_acc"], st["split_prop"], st["merge_acc"], st["merge_prop"])
    write_json(out / "fit.json", summary)
    for f in files:
        print(out / f)
    return 0


# --- analytics ----------------------------------------------------------------

def _params(obj) -> PitmanYorParams:
    return PitmanYorParams(float(obj.get("alpha", 0.0)), float(obj.get("beta", 1.0)))


def _kernel(obj) -> KernelSpec:
    fam = obj.get("kernel", BERNOULLI_BETA)
    return kernel_from_json(obj, BINARY if fam == BERNOULLI_BETA else COUNT)


def _study_cells(doc) -> list:
    I = int(doc.get("I", 100))
    reps = int(doc.get("replicates", 2000))
    if "cells" in doc:
        specs = doc["cells"]
    else:
        g = doc["grid"]
        specs = [{"alpha": a, "beta": b, "kernel": k}
                 for a, b, k in itertools.product(g["alpha"], g["beta"], g["kernels"])]
    return [StudyCell(_params(c), _kernel(c.get("kernel", {})), I, reps,
                      c.get("label", f"cell{i}")) for i, c in enumerate(specs)]


def cmd_analytics(args) -> int:
    doc = _load_json(args.config)
    seed = check_seed(args.seed)
    meta = {"tool": "hsbm", "version": __version__, "seed": seed, "config_digest": digest(doc)}
    study = "cells" in doc or "grid" in doc
    names = ["prior_summary.csv"] + (["study_stats.csv", "survival.csv"] if study else [])
    try:
        if study:
            cells = _study_cells(doc)
        else:
            cells = [StudyCell(_params(doc), _kernel(doc.get("kernel", {})), int(doc.get("I", 20)),
                               label=doc.get("label", ""))]
    except (KeyError, TypeError) as e:
        raise CliError(f"invalid analytics config: missing or malformed {e}") from None
    out = _prepare_output(args.output, names, args.force)
    rows = []
    for c in cells:
        summ = prior_summary(c.I, c.params, c.kernel)
        rows.append({"label": c.label, "I": c.I, "alpha": c.params.alpha, "beta": c.params.beta,
                     **summ.as_dict()})
    write_table(out / "prior_summary.csv", rows, meta)
    if study:
        res = property_study(cells, seed=seed, n_jobs=args.jobs)
        write_table(out / "study_stats.csv", res.stat_rows(), meta)
        write_table(out / "survival.csv", res.survival_rows(), meta)
    for n in names:
        print(out / n)
    return 0


# --- summarize ----------------------------------------------------------------

def cmd_summarize(args) -> int:
    coll = load_manifest(args.manifest)
    traces = [Trace.read(p) for p in args.trace]
    for p, tr in zip(args.trace, traces):
        if not len(tr):
            raise CliError(f"{p}: trace has no records")
        if tr.num_networks != coll.num_networks or tr.num_actors != coll.num_actors:
            raise CliError(f"{p}: trace shape ({tr.num_networks} networks, {tr.num_actors} actors) "
                           f"does not match the manifest")
    pooled = Trace.pooled(traces)
    J = coll.num_networks
    actor_files = [f"actor_incidence_{name}.csv" for name in coll.network_names]
    names = ["network_incidence.csv", "zeta_estimate.json", "xi_estimates.json",
             "assortativity.csv"] + actor_files
    out = _prepare_output(args.output, names, args.force)
    meta = {"tool": "hsbm", "version": __version__, "a": args.a, "b": args.b,
            "traces": [{"path": str(p), "seed": tr.meta.get("seed"),
                        "config_digest": tr.meta.get("config_digest")}
                       for p, tr in zip(args.trace, traces)],
            "samples": len(pooled)}
    D = network_incidence(pooled)
    write_labeled_matrix(out / "network_incidence.csv", D, coll.network_names, meta)
    actors = coll.actor_names or [str(i + 1) for i in range(coll.num_actors)]
    for j, f in enumerate(actor_files):
        write_labeled_matrix(out / f, actor_incidence(pooled, j), actors, meta)
    zest = zeta_point_estimate(pooled, args.a, args.b)
    write_json(out / "zeta_estimate.json", {**zest.as_dict(), "networks": coll.network_names,
                                            "meta": meta})
    # faction estimate per estimated network cluster, pooling its member networks' samples
    clusters = []
    for k, members in enumerate(zest.partition.blocks(), start=1):
        samples = [r.xi_for_network(j) for r in pooled for j in members]
        est = point_estimate(incidence_from_labels(samples), args.a, args.b, samples)
        clusters.append({"cluster": k, "networks": [coll.network_names[j] for j in members],
                         **est.as_dict()})
    write_json(out / "xi_estimates.json", {"clusters": clusters, "meta": meta})
    ups = [posterior_assortativity(pooled, j, coll.kernel_specs[j].family,
                                   coll.kernel_specs[j].as_vector()) for j in range(J)]
    rows = [{"sample": t, **{coll.network_names[j]: repr(float(ups[j][t])) for j in range(J)}}
            for t in range(len(pooled))]
    write_table(out / "assortativity.csv", rows, meta)
    for n in names:
        print(out / n)
    return 0


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    shared.add_argument("--output", required=True, help="output directory")
    shared.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = argparse.ArgumentParser(prog="hsbm", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"hsbm {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[shared], help="simulate a planted collection")
    s.add_argument("--config", help="simulation config JSON")
    s.add_argument("--preset", choices=sorted(PRESETS), help="built-in simulation config")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", parents=[shared], help="run the sampler on a manifest")
    f.add_argument("--manifest", required=True)
    f.add_argument("--config", help="MCMC config JSON")
    f.add_argument("--chains", type=int, default=1)
    f.add_argument("--jobs", type=int, default=1, help="worker processes for multiple chains")
    f.add_argument("--iterations", type=int)
    f.add_argument("--burn-in", dest="burn_in", type=int)
    f.add_argument("--thin", type=int)
    f.set_defaults(func=cmd_fit)

    a = sub.add_parser("analytics", parents=[shared], help="prior properties and simulation studies")
    a.add_argument("--config", required=True)
    a.add_argument("--jobs", type=int, default=1)
    a.set_defaults(func=cmd_analytics)

    m = sub.add_parser("summarize", parents=[shared], help="posterior summaries from traces")
    m.add_argument("--trace", nargs="+", required=True)
    m.add_argument("--manifest", required=True)
    m.add_argument("--a", type=float, default=1.0, help="loss weight for joining")
    m.add_argument("--b", type=float, default=1.0, help="loss weight for separating")
    m.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CliError, FormatError, NetworkValidationError, ValueError, KeyError,
            OSError) as e:
        print(f"hsbm {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
