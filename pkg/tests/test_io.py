import json

import numpy as np
import pytest

from hsbm.io import (FormatError, kernel_from_json, kernel_to_json, load_manifest, read_matrix_csv,
                     read_metadata, read_table, save_collection, write_labeled_matrix,
                     write_matrix_csv, write_table)
from hsbm.kernels import KernelSpec, PointMass
from hsbm.network import NetworkValidationError


def test_matrix_roundtrip(tmp_path):
    y = np.array([[0, 2, 1], [2, 0, 0], [1, 0, 0]])
    write_matrix_csv(tmp_path / "m.csv", y)
    assert (tmp_path / "m.csv").read_text() == "0,2,1\n2,0,0\n1,0,0\n"
    assert np.array_equal(read_matrix_csv(tmp_path / "m.csv"), y)
    with pytest.raises(FormatError):
        write_matrix_csv(tmp_path / "bad.csv", [[0.5]])


@pytest.mark.parametrize("text", ["0,1\n1,x\n", "0,1\n1\n", "", "0,1.5\n1,0\n"])
def test_matrix_rejects_bad_cells(tmp_path, text):
    (tmp_path / "m.csv").write_text(text)
    with pytest.raises(FormatError):
        read_matrix_csv(tmp_path / "m.csv")


def test_kernel_json_roundtrip():
    spec = KernelSpec("poisson-gamma", PointMass(3.0), (2.0, 0.5))
    assert kernel_from_json(kernel_to_json(spec), "count") == spec
    assert kernel_from_json({}, "binary").family == "bernoulli-beta"


def test_manifest_roundtrip(tmp_path, pair_collection):
    path = save_collection(pair_collection, tmp_path, {"seed": 1})
    back = load_manifest(path)
    assert back.num_networks == 2 and back.num_actors == 4
    for a, b in zip(back.networks, pair_collection.networks):
        assert np.array_equal(a.values, b.values)
    assert back.kernel_specs == pair_collection.kernel_specs
    assert json.loads(path.read_text())["meta"] == {"seed": 1}


def _manifest(tmp_path, **over):
    doc = {"version": "1", "networks": [{"file": "a.csv", "directed": False, "family": "binary"}]}
    doc.update(over)
    (tmp_path / "a.csv").write_text("0,1\n1,0\n")
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(doc))
    return p


def test_manifest_errors(tmp_path):
    assert load_manifest(_manifest(tmp_path)).num_actors == 2
    with pytest.raises(FormatError):
        load_manifest(_manifest(tmp_path, version="9"))
    with pytest.raises(FormatError):
        load_manifest(_manifest(tmp_path, networks=[]))
    with pytest.raises(FormatError):
        load_manifest(_manifest(tmp_path, networks=[{"file": "a.csv", "family": "binary"}]))
    with pytest.raises(FormatError):
        load_manifest(_manifest(tmp_path, num_actors=3))
    with pytest.raises(FormatError):
        load_manifest(_manifest(tmp_path, networks=[{"file": "a.csv", "directed": False,
                                                    "family": "ternary"}]))
    path = _manifest(tmp_path)
    (tmp_path / "a.csv").write_text("0,1\n0,0\n")   # asymmetric but declared undirected
    with pytest.raises(NetworkValidationError):
        load_manifest(path)


def test_tables_have_one_header_row(tmp_path):
    write_table(tmp_path / "t.csv", [{"x": 1, "y": "a"}, {"x": 2, "y": "b"}], {"seed": 3})
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "x,y" and len(lines) == 4
    assert read_table(tmp_path / "t.csv") == [{"x": "1", "y": "a"}, {"x": "2", "y": "b"}]
    assert read_metadata(tmp_path / "t.csv") == {"seed": 3}
    write_labeled_matrix(tmp_path / "m.csv", np.eye(2), ["u", "v"])
    rows = read_table(tmp_path / "m.csv")
    assert rows[0] == {"": "u", "u": "1.0", "v": "0.0"}
    assert read_metadata(tmp_path / "m.csv") is None
