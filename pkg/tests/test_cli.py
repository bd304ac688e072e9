import json

import numpy as np
import pytest

from packrig import data_path
from packrig.cli import main
from packrig.packing_engine import write_packing, load_packing


def read(path):
    return json.loads(path.read_text())


@pytest.fixture(scope="module")
def certified(tmp_path_factory):
    out = tmp_path_factory.mktemp("certify")
    code = main(["--out", str(out), "certify", str(data_path("genus2_packing.json")), "--dump-matrices"])
    return code, out


def test_validate(tmp_path):
    assert main(["--out", str(tmp_path), "validate", str(data_path("genus2.json"))]) == 0
    rep = read(tmp_path / "validate-report.json")
    assert rep["accepted"] and rep["stats"]["genus"] == 2
    assert main(["--out", str(tmp_path), "validate", str(data_path("bigon_sphere.json"))]) == 2
    rep = read(tmp_path / "validate-report.json")
    assert not rep["accepted"] and rep["bigons"]
    man = read(tmp_path / "validate-manifest.json")
    assert man["exit_code"] == 2 and len(man["inputs"]["complex"]["sha256"]) == 64


def test_missing_file(tmp_path):
    assert main(["--out", str(tmp_path), "validate", str(tmp_path / "nope.json")]) == 2
    assert (tmp_path / "validate-manifest.json").exists()


def test_solve(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "solve", str(data_path("torus7.json"))]) == 2
    assert "genus < 2" in capsys.readouterr().err
    assert main(["--out", str(tmp_path), "solve", str(data_path("genus2.json")), "--depth", "1"]) == 0
    shipped = load_packing(data_path("genus2_packing.json"))
    fresh = load_packing(tmp_path / "packing.json")
    for a, X in shipped.selection.items():
        assert np.abs(fresh.selection[a] - X).max() < 1e-12
    assert (tmp_path / "packing.svg").read_text().startswith("<svg")
    assert read(tmp_path / "solve-report.json")["max_star_defect"] < 1e-9


def test_certify_passes(certified, capsys):
    code, out = certified
    assert code == 0
    rep = read(out / "certify-report.json")
    assert rep["exit_code"] == 0
    values = {c["check"]: c["value"] for c in rep["checks"]}
    assert all(c["verdict"] == "pass" for c in rep["checks"])
    assert values["dim H1"] == 6 and values["rank J"] == 36 and values["dim ker J"] == 12
    assert values["dim H"] == 6 and values["vanishing kernel"] == 0 and values["frozen kernel"] == 0
    assert values["kmt rank"] == 6
    assert (out / "matrices.npz").exists()
    man = read(out / "certify-manifest.json")
    assert man["command"] == "certify" and man["exit_code"] == 0
    assert str(out / "certify-report.json") in man["outputs"]


def test_certify_is_deterministic(certified, tmp_path):
    _, out = certified
    assert main(["--out", str(tmp_path), "certify", str(data_path("genus2_packing.json"))]) == 0
    assert (tmp_path / "certify-report.json").read_bytes() == (out / "certify-report.json").read_bytes()


def test_certify_rejects_corrupted_packing(tmp_path):
    doc = write_packing(load_packing(data_path("genus2_packing.json")))
    item = max(doc["transitions"], key=lambda it: abs(it["matrix"][1][0]) + abs(it["matrix"][2][0]))
    item["matrix"] = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["--out", str(tmp_path), "certify", str(bad)]) == 2
    assert read(tmp_path / "certify-report.json")["checks"][0]["verdict"] == "fail"


def test_certify_indeterminate(tmp_path):
    code = main(["--out", str(tmp_path), "certify", str(data_path("genus2_packing.json")),
                 "--min-gap", "1e30"])
    assert code == 3
    rep = read(tmp_path / "certify-report.json")
    assert {c["verdict"] for c in rep["checks"]} == {"indeterminate"}


def test_decorations(tmp_path):
    args = ["--out", str(tmp_path), "decorations", str(data_path("genus2.json")), "--max-blue", "3"]
    assert main(args) == 0
    rep = read(tmp_path / "decorations-report.json")
    assert rep["complete"] and rep["found"] == [] and rep["genus"] == 2
    first = (tmp_path / "decorations-report.json").read_bytes()
    assert main(["--out", str(tmp_path), "decorations", str(data_path("genus2.json")),
                 "--mode", "randomized", "--budget", "20000", "--seed", "3"]) == 0
    rep = read(tmp_path / "decorations-report.json")
    assert rep["samples"] == 20000 and rep["found"] == [] and not rep["complete"]
    assert read(tmp_path / "decorations-manifest.json")["seed"] == 3
    assert main(args) == 0
    assert (tmp_path / "decorations-report.json").read_bytes() == first


def test_crossratio(tmp_path):
    assert main(["--out", str(tmp_path), "crossratio", str(data_path("genus2_packing.json"))]) == 0
    rep = read(tmp_path / "crossratio.json")
    assert len(rep["values"]) == 36 and rep["max_imag"] < 1e-8
    assert all(v > 0 for v in rep["values"].values())
