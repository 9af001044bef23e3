import csv
import json

import numpy as np
import pytest

from tetrasynth.cli import run
from tetrasynth.planted import planted_mu_problem, planted_tetra_problem
from tetrasynth.serialization import encode_array, problem_to_json
from tetrasynth.tetrablock import in_closed_tetrablock


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="in.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)
    return _write


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = run(args + ["--output", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_membership(write, tmp_path):
    code, out = run_json(["membership", "-i", write({"kind": "membership", "point": [[0, 0]] * 3})], tmp_path)
    assert code == 0
    assert out["in_closed"] is True and out["in_open"] is True and out["in_bE"] is False
    code, out = run_json(["membership", "-i", write({"kind": "membership", "point": [[2, 0], [0, 0], [0, 0]]})],
                         tmp_path)
    assert code == 2 and out["in_closed"] is False


def test_mu_value(write, tmp_path):
    doc = {"kind": "mu_value", "matrix": encode_array([[0, 2], [2, 0]])}
    code, out = run_json(["mu", "-i", write(doc), "--tol", "1e-6"], tmp_path)
    assert code == 0
    assert out["mu"] == pytest.approx(2.0, rel=1e-6)


def test_malformed_json_reports_error(write, tmp_path, capsys):
    code = run(["mu", "-i", write("{not json")])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "InvalidInputError"


def test_wrong_kind_and_bad_usage(write, capsys):
    assert run(["mu", "-i", write({"kind": "membership", "point": [[0, 0]] * 3})]) == 1
    assert run(["frobnicate"]) == 1
    assert run(["mu", "-i", write({"kind": "mu_value", "matrix": [[1, 0]]})]) == 1
    assert run(["mu", "-i", "/nonexistent/file.json"]) == 1
    errs = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
    assert len(errs) == 4 and all("error" in e for e in errs)


def test_solve_mu_and_verify(write, tmp_path, rng):
    p, _, _ = planted_mu_problem(rng, 3, 2)
    code, cert = run_json(["solve-mu", "-i", write(problem_to_json(p))], tmp_path, "cert.json")
    assert code == 0 and cert["status"] == "Solvable"
    assert cert["meta"]["seed"] == 0 and "wall_time" in cert["meta"]
    code, rep = run_json(["verify", "-i", str(tmp_path / "cert.json")], tmp_path, "rep.json")
    assert code == 0 and rep["ok"]
    assert rep["mu_report"]["mu_excess"] <= 1e-6


def test_solve_tetra_and_verify(write, tmp_path, rng):
    p, _ = planted_tetra_problem(rng, 3, 2)
    code, cert = run_json(["solve-tetra", "-i", write(problem_to_json(p)), "--starts", "8"], tmp_path, "c.json")
    assert code == 0
    wrapped = write({"kind": "verify", "certificate": cert}, "wrapped.json")
    code, rep = run_json(["verify", "-i", wrapped], tmp_path, "rep.json")
    assert code == 0 and rep["tetra_report"]["ok"]


def test_verify_detects_tampering(write, tmp_path, rng):
    p, _ = planted_tetra_problem(rng, 2, 2)
    _, cert = run_json(["solve-tetra", "-i", write(problem_to_json(p))], tmp_path, "c.json")
    cert["certificate"]["params"]["b"][0][0] += 0.1
    code, rep = run_json(["verify", "-i", write(cert, "bad.json")], tmp_path, "rep.json")
    assert code == 2 and not rep["ok"]


def test_infeasible_exit_code(write, tmp_path):
    doc = {"kind": "mu_synthesis", "nodes": [[0, 0]], "targets": [encode_array([[0, 2], [2, 0]])]}
    code, cert = run_json(["solve-mu", "-i", write(doc)], tmp_path)
    assert code == 2 and cert["status"] == "Infeasible"
    code, rep = run_json(["verify", "-i", str(tmp_path / "out.json")], tmp_path, "rep.json")
    assert code == 0 and rep["reason"] == "target_not_in_closed_tetrablock"


def test_unknown_exit_code(write, tmp_path):
    p, _ = planted_tetra_problem(np.random.default_rng(7), 4, 1)
    code, cert = run_json(["solve-tetra", "-i", write(problem_to_json(p)), "--starts", "0"], tmp_path)
    assert code in (0, 3)
    assert (code == 3) == (cert["status"] == "Unknown")


def test_hypothesis_violation_is_an_error(write, capsys):
    doc = {"kind": "mu_synthesis", "nodes": [[0, 0]], "targets": [encode_array([[0.5, 0], [0.2, 0.5]])]}
    assert run(["solve-mu", "-i", write(doc)]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "HypothesisViolationError"


def test_realize_and_lift(write, tmp_path):
    swap = {"dimH": 0, "A": [], "B": [], "C": [[], []], "D": encode_array([[0, 1], [1, 0]])}
    doc = {"kind": "realize", "colligation": swap, "points": [[0, 0], [0.5, 0]]}
    code, out = run_json(["realize", "-i", write(doc)], tmp_path)
    assert code == 0 and out["ok"]
    assert out["values"][1] == [[0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]]
    doc["kind"] = "lift"
    code, out = run_json(["lift", "-i", write(doc)], tmp_path, "lift.json")
    assert code == 0 and not out["diagonal"]
    assert out["identity_residual"] <= 1e-8
    assert out["F21_at_0"] == pytest.approx([1.0, 0.0])


def test_sample_grid_tetra_slice(write, tmp_path):
    params = {"vary": "x3", "point": [[0, 0]] * 3, "re": [-1, 1], "im": [-1, 1], "shape": [50, 50]}
    out = tmp_path / "slice.csv"
    assert run(["sample-grid", "tetra-slice", "-i", write(params), "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["re", "im", "verdict"] and len(rows) == 2501
    for re_, im_, v in rows[1:]:
        assert int(v) == in_closed_tetrablock((0, 0, complex(float(re_), float(im_))))


def test_sample_grid_mu_levels(write, tmp_path):
    params = {"A0": encode_array(np.diag([0, 0.5])), "A1": encode_array(np.diag([1, 0])),
            "re": [0, 1], "im": [0, 0], "shape": [11, 1]}
    out = tmp_path / "mu.csv"
    assert run(["sample-grid", "mu-levels", "-i", write(params), "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))[1:]
    assert len(rows) == 11
    for re_, _, v in rows:
        assert float(v) == pytest.approx(max(float(re_), 0.5), rel=1e-8)


def test_sample_grid_empty_and_malformed(write, tmp_path):
    out = tmp_path / "empty.csv"
    assert run(["sample-grid", "tetra-slice", "-i", write({"shape": [0, 0]}), "-o", str(out)]) == 0
    assert out.read_text() == "re,im,verdict\n"
    assert run(["sample-grid", "tetra-slice", "-i", write({"re": [1, -1]})]) == 1
    assert run(["sample-grid", "tetra-slice", "-i", write({"shape": [-1, 2]})]) == 1


def test_threads_from_environment(write, tmp_path, rng, monkeypatch):
    p, _ = planted_tetra_problem(rng, 3, 2)
    path = write(problem_to_json(p))
    _, a = run_json(["solve-tetra", "-i", path], tmp_path, "a.json")
    monkeypatch.setenv("TETRASYNTH_THREADS", "3")
    _, b = run_json(["solve-tetra", "-i", path], tmp_path, "b.json")
    a["meta"].pop("wall_time")
    b["meta"].pop("wall_time")
    assert a == b
