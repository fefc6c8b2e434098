import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sdgkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_verify_filtered(capsys):
    code, report = run_json(capsys, "verify", "--only", "a4", "--dim", "3")
    assert code == 0
    assert {e["identity_id"] for e in report["entries"]} == {"a4-dim3"}
    assert report["summary"]["total"] == 18


def test_verify_degraded_exits_nonzero(capsys):
    code, report = run_json(capsys, "--quad-order", "2", "verify", "--only", "a4", "--summary")
    assert code == 1
    assert report["summary"]["failed"] > 0 and "entries" not in report


def test_verify_tolerance_override(capsys):
    code, report = run_json(capsys, "verify", "--only", "a4", "--dim", "1", "--quad-order", "2",
                            "--tol", "a4=10")
    assert code == 0
    assert all(e["tolerance"] == 10 for e in report["entries"])


def test_verify_is_byte_deterministic(capsys):
    _, a, _ = run(capsys, "verify", "--only", "transport", "--threads", "1")
    _, b, _ = run(capsys, "verify", "--only", "transport", "--threads", "3")
    assert a == b


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "verify", "--only", "transport")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][0] == "identity_id" and len(rows) == 6


def test_flow(capsys):
    code, data = run_json(capsys, "flow", "--xi", "x^2", "--m", "1", "--order", "5")
    assert code == 0
    assert data["jets"] == [[1.0] * 6]
    assert data["text"][0].endswith("(mod t^{6})")


def test_flow_exact_planar(capsys):
    code, data = run_json(capsys, "--exact", "flow", "--xi", "y, -x", "--m", "1, 0", "--order", "4")
    assert data["jets"] == [[1, 0, "-1/2", 0, "1/24"], [0, -1, 0, "1/6", 0]]


def test_flow_order_limit(capsys):
    code, out, err = run(capsys, "--jet-order", "3", "flow", "--xi", "x", "--m", "1", "--order", "5")
    assert code == 2 and "exceeds" in err


def test_pair(capsys):
    code, data = run_json(capsys, "pair", "--mu", "lincomb(0.5*sphere(dim=1,t=0.3,avg))", "--phi", "x^2")
    assert code == 0 and data["value"] == pytest.approx(0.09)
    code, data = run_json(capsys, "pair", "--mu", "ball(dim=3, t=1, avg)", "--phi", "1 + 0*x*y*z")
    assert data["value"] == pytest.approx(4 * math.pi / 3)


def test_pde_residual(capsys):
    code, data = run_json(capsys, "pde-residual", "--u", "exp(t)*exp(-(x - t)^2)", "--xi", "1",
                          "--eta", "u", "--t", "0.2, 0.5", "--m", "0.1; -0.3")
    assert code == 0
    assert len(data["rows"]) == 4 and all(r["pass"] for r in data["rows"])
    code, data = run_json(capsys, "pde-residual", "--u", "exp(t)*exp(-(x - t)^2)", "--xi", "1",
                          "--t", "0.2", "--m", "0.1")
    assert code == 1 and not data["rows"][0]["pass"]


def test_wave(capsys):
    code, data = run_json(capsys, "wave", "--dim", "3", "--kind", "speed", "--t", "0.5",
                          "--phi", "exp(-x^2-y^2-z^2)")
    assert code == 0 and data["pass"] and abs(data["residual"]) <= 1e-6
    code, data = run_json(capsys, "wave", "--dim", "1", "--kind", "position", "--t", "0.5",
                          "--phi", "x^4", "--maclaurin", "4")
    assert data["maclaurin"] == [0, 0, 0, 0, 1]


def test_heat(capsys):
    code, data = run_json(capsys, "heat", "--t", "0.25", "--phi", "x^2")
    assert code == 0 and data["pairing"] == pytest.approx(0.5)
    code, data = run_json(capsys, "heat", "--t", "0.5", "--phi", "x^4", "--n", "1")
    assert data["time_derivative"]["value"] == pytest.approx(12.0)
    code, data = run_json(capsys, "heat", "--nilpotent-order", "2")
    assert [t["distribution"] for t in data["terms"]] == [
        "dirac(0)", "laplacian(dirac(0))", "laplacian(laplacian(dirac(0)))"]
    code, data = run_json(capsys, "heat", "--phi", "x^2", "--maclaurin", "2")
    assert data["maclaurin"] == [0, 2, 0]


def test_heat_negative_time(capsys):
    code, _, err = run(capsys, "heat", "--t", "-1", "--phi", "x")
    assert code == 2 and "negative" in err


def test_diffuse(capsys):
    code, data = run_json(capsys, "diffuse", "--h-epsilon", "0.05", "--phi", "x^2")
    assert code == 0
    heights = [c["height_jet"] for c in data["columns"]]
    assert heights == [[0, 1, 0, 0], [1, -2, 0, 0], [0, 1, 0, 0]]
    assert [c["height"] for c in data["columns"]] == pytest.approx([0.05, 0.9, 0.05])
    assert data["pairing_columns"] == data["pairing_heat"]


def test_diffuse_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "diffuse")
    assert code == 0 and out.count("\n") >= 4


def test_taylor(capsys):
    code, data = run_json(capsys, "taylor", "--phi", "exp(x)", "--order", "3")
    assert data["coefficients"] == pytest.approx([1, 1, 0.5, 1 / 6], rel=1e-15)
    code, data = run_json(capsys, "--exact", "taylor", "--phi", "exp(x)", "--order", "3")
    assert data["coefficients"] == [1, 1, "1/2", "1/6"]
    code, data = run_json(capsys, "taylor", "--phi", "x*y", "--at", "1, 2", "--direction", "1, 1", "--order", "2")
    assert data["coefficients"] == [2, 3, 1]


def test_parse_error_reports_position(capsys):
    code, _, err = run(capsys, "pair", "--mu", "sphere(dim=2,t=1", "--phi", "x")
    assert code == 2
    assert "position 16" in err and "^" in err


def test_unknown_identifier(capsys):
    code, _, err = run(capsys, "taylor", "--phi", "tanh(x)")
    assert code == 2 and "unknown function" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sdgkit", "flow", "--xi", "x", "--m", "1", "--order", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["jets"] == [[1, 1, 0.5]]
