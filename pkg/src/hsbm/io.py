"""File formats: adjacency CSV, collection manifests, tabular outputs."""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .kernels import KernelSpec, PointMass, default_kernel
from .network import BINARY, COUNT, NetworkCollection, validate_network

MANIFEST_VERSION = "1"
_INT = re.compile(r"^\s*-?\d+\s*$")


class FormatError(ValueError):
    pass


def read_matrix_csv(path) -> np.ndarray:
    """Headerless comma-separated integer matrix.  Anything but integers is rejected."""
    text = Path(path).read_text()
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        for c in row:
            if not _INT.match(c):
                raise FormatError(f"{path}:{lineno}: non-integer cell {c!r}")
        rows.append([int(c) for c in row])
    if not rows:
        raise FormatError(f"{path}: empty matrix")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise FormatError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def write_matrix_csv(path, values) -> None:
    arr = np.asarray(values)
    if not np.all(arr == np.round(arr)):
        raise FormatError("only integer-valued matrices can be written")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in arr.astype(np.int64):
            w.writerow(row.tolist())


def _hyper_from_json(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return PointMass(float(obj["point"]))
    a, b = obj
    return (float(a), float(b))


def _hyper_to_json(h):
    if isinstance(h, PointMass):
        return {"point": h.value}
    return [float(h[0]), float(h[1])]


def kernel_from_json(obj: dict, value_family: str = BINARY) -> KernelSpec:
    base = default_kernel(value_family)
    fam = obj.get("kernel", base.family)
    lam_d = _hyper_from_json(obj.get("lambda_D")) or base.lambda_D
    lam_o = _hyper_from_json(obj.get("lambda_O")) or base.lambda_O
    return KernelSpec(fam, lam_d, lam_o)


def kernel_to_json(spec: KernelSpec) -> dict:
    return {"kernel": spec.family, "lambda_D": _hyper_to_json(spec.lambda_D),
            "lambda_O": _hyper_to_json(spec.lambda_O)}


def load_manifest(path) -> NetworkCollection:
    """Read a manifest and every network file it lists (paths relative to the manifest)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from None
    if str(doc.get("version")) != MANIFEST_VERSION:
        raise FormatError(f"{path}: unsupported manifest version {doc.get('version')!r}")
    entries = doc.get("networks")
    if not entries:
        raise FormatError(f"{path}: manifest lists no networks")
    nets, specs, names = [], [], []
    for k, ent in enumerate(entries):
        for key in ("file", "directed", "family"):
            if key not in ent:
                raise FormatError(f"{path}: network entry {k} missing {key!r}")
        fam = ent["family"]
        if fam not in (BINARY, COUNT):
            raise FormatError(f"{path}: network entry {k} has unknown family {fam!r}")
        mat = read_matrix_csv(path.parent / ent["file"])
        nets.append(validate_network(mat, bool(ent["directed"]), bool(ent.get("acyclic", True)),
                                     fam))
        specs.append(kernel_from_json(ent, fam))
        names.append(ent.get("name", Path(ent["file"]).stem))
    coll = NetworkCollection(nets, specs, doc.get("actor_names"), names)
    if "num_actors" in doc and int(doc["num_actors"]) != coll.num_actors:
        raise FormatError(f"{path}: num_actors={doc['num_actors']} but matrices are "
                          f"{coll.num_actors} x {coll.num_actors}")
    return coll


def manifest_document(collection: NetworkCollection, files, meta: dict | None = None) -> dict:
    entries = []
    for net, spec, name, f in zip(collection.networks, collection.kernel_specs,
                                  collection.network_names, files):
        entries.append({"name": name, "file": str(f), "directed": net.directed,
                        "acyclic": net.acyclic, "family": net.family, **kernel_to_json(spec)})
    doc = {"version": MANIFEST_VERSION, "num_actors": collection.num_actors, "networks": entries}
    if collection.actor_names is not None:
        doc["actor_names"] = list(collection.actor_names)
    if meta:
        doc["meta"] = meta
    return doc


def save_collection(collection: NetworkCollection, outdir, meta: dict | None = None) -> Path:
    """Write every network as CSV plus ``manifest.json``; returns the manifest path."""
    outdir = Path(outdir)
    files = []
    for net, name in zip(collection.networks, collection.network_names):
        f = f"{name}.csv"
        write_matrix_csv(outdir / f, net.values)
        files.append(f)
    mpath = outdir / "manifest.json"
    write_json(mpath, manifest_document(collection, files, meta))
    return mpath


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def metadata_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


def write_table(path, rows: list, meta: dict | None = None, fieldnames=None) -> None:
    """CSV with one header row, preceded by a ``#`` metadata comment line."""
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        if meta is not None:
            fh.write(metadata_line(meta))
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def write_labeled_matrix(path, matrix, labels, meta: dict | None = None) -> None:
    """Square matrix as CSV with a header row of labels and a leading label column."""
    matrix = np.asarray(matrix)
    rows = [{"": lab, **{str(l2): repr(float(v)) for l2, v in zip(labels, row)}}
            for lab, row in zip(labels, matrix)]
    write_table(path, rows, meta, fieldnames=[""] + [str(l) for l in labels])


def read_table(path) -> list[dict]:
    """Rows of a CSV written by :func:`write_table` (``#`` lines skipped)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def read_metadata(path) -> dict | None:
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# "):
        return json.loads(first[2:])
    return None
