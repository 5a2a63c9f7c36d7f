import json

import numpy as np
import pytest

from alonlab.cli import main
from alonlab.graph import bouquet, complete_graph, cycle_graph, load_graph, perm, save_graph
from alonlab.vlg import VLG, Monomial, VLGEdge, save_vlg


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def k4(tmp_path):
    path = tmp_path / "k4.json"
    save_graph(complete_graph(4), path)
    return path


@pytest.fixture
def loops(tmp_path):
    path = tmp_path / "b2.json"
    g = bouquet(2, [perm(1), perm(2)])
    g.model = "g"
    save_graph(g, path)
    return path


def test_sample_round_trip(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, _, _ = run(capsys, "sample", "--model", "g", "--n", 12, "--d", 4, "--seed", 3, "--out", out)
    assert code == 0
    g = load_graph(out)
    assert g.n == 12 and g.regular_degree() == 4


def test_spectrum(k4, capsys):
    code, out, _ = run(capsys, "spectrum", k4)
    assert code == 0
    assert np.allclose(json.loads(out)["eigenvalues"], [3, -1, -1, -1])


def test_trace_commands(k4, loops, capsys):
    code, out, err = run(capsys, "trace", "verify", k4, "--kmax", 6)
    lines = out.strip().splitlines()
    assert code == 0 and err == "" and lines[0].startswith("identity,k")
    assert all(line.endswith("True") for line in lines[1:])
    code, out, _ = run(capsys, "trace", "count", k4, "--kmax", 3)
    assert out.strip().splitlines()[3].split(",")[:2] == ["3", "24"]
    code, out, _ = run(capsys, "trace", "selective", loops, "--k", 2, "--s", 2, "--tangle", loops)
    assert out.strip() == "4"


def test_tangle_commands(k4, loops, capsys):
    code, out, _ = run(capsys, "tangle", "classify", loops, "--d", 4)
    assert code == 0 and json.loads(out)["kind"] == "hypercritical"
    code, out, _ = run(capsys, "tangle", "automorphisms", loops)
    assert out.strip() == "1"
    code, out, _ = run(capsys, "tangle", "occurrences", loops, "--tangle", loops)
    assert out.strip() == "1"
    code, _, err = run(capsys, "tangle", "classify", k4, "--d", 4)
    assert code == 2 and "model" in err


def test_taufund_writes_witness(tmp_path, capsys):
    w = tmp_path / "w.json"
    code, out, _ = run(capsys, "taufund", "--model", "i", "--d", 5, "--witness", w)
    assert code == 0 and out.splitlines()[0] == "1"
    assert load_graph(w).num_pairs == 3


def test_vlg_commands(tmp_path, capsys):
    path = tmp_path / "v.json"
    save_vlg(VLG(1, (VLGEdge(0, 0, Monomial(1)), VLGEdge(0, 0, Monomial(1))), True), path)
    code, out, _ = run(capsys, "vlg", "lambda1", path, "--det")
    res = json.loads(out)
    assert code == 0 and res["lambda1"] == pytest.approx(2) and res["lambda1_det"] == pytest.approx(2)
    code, out, _ = run(capsys, "vlg", "subdivide", path)
    assert json.loads(out)["vertices"] == 1


def test_treed(tmp_path, capsys):
    path = tmp_path / "c.json"
    save_graph(cycle_graph(3), path)
    code, out, _ = run(capsys, "treed", path, "--d", 4)
    assert code == 0 and json.loads(out)["lambda_irred"] == pytest.approx(1)


def test_oracle_commands(capsys):
    code, out, _ = run(capsys, "oracle", "walk", "--model", "g", "--n", 7, "--word", "1", "--t", "1,2")
    assert out.strip() == "1/7"
    code, exp, _ = run(capsys, "oracle", "expected", "--model", "g", "--n", 3, "--d", 4, "--kmax", 4)
    code, brute, _ = run(capsys, "oracle", "brute", "--model", "g", "--n", 3, "--d", 4, "--kmax", 4)
    assert exp == brute


def test_experiment_run_and_fit(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "g", "d": 4, "n_list": [10, 20, 40], "samples": 100,
                               "thresholds": {"bare": 0.0}}))
    out = tmp_path / "rows.csv"
    code, _, _ = run(capsys, "experiment", "run", "--config", cfg, "--workers", 1, "--out", out)
    assert code == 0 and out.read_text().startswith("model,d,n,")
    code, text, _ = run(capsys, "experiment", "fit", out)
    assert code == 0 and "slope" in json.loads(text)


def test_spreader(k4, capsys):
    code, out, _ = run(capsys, "spreader", k4, "--gamma", 1)
    res = json.loads(out)
    assert res["holds"] and res["separation"]["holds"]


def test_exit_codes(tmp_path, capsys):
    code, _, err = run(capsys, "spectrum", tmp_path / "missing.json")
    assert code == 2 and err.startswith("error")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "spectrum", bad)[0] == 2
    code, _, _ = run(capsys, "sample", "--model", "g", "--n", 10, "--d", 3)
    assert code == 2
    big = tmp_path / "c30.json"
    save_graph(cycle_graph(30), big)
    assert run(capsys, "spreader", big, "--gamma", 0.1)[0] == 4
