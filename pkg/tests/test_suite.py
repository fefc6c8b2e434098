import csv
import io
import json
import math
from fractions import Fraction as F

import pytest

from sdgkit.algebra import Jet
from sdgkit.suite import (
    CSV_COLUMNS, Check, SuiteConfig, _evaluate, build_checks, errors, jsonable, report_to_csv,
    report_to_json, run_suite,
)


def test_filter_only_and_dim():
    checks = build_checks(SuiteConfig(only="a4", dims=(3,)))
    assert checks and all(c.identity_id == "a4-dim3" for c in checks)
    assert len(checks) == 18  # 3 times x 6 functions


def test_filter_glob():
    ids = {c.identity for c in build_checks(SuiteConfig(only="wave-*"))}
    assert ids == {"wave-position", "wave-position-initial", "wave-speed", "wave-speed-initial",
                   "wave-closure"}


def test_a5_is_dim1_only():
    assert {c.dim for c in build_checks(SuiteConfig(only="a5"))} == {1}


def test_tolerance_resolution():
    check = build_checks(SuiteConfig(only="a1", dims=(2,)))[0]
    assert check.tolerance(SuiteConfig()) == 1e-8
    assert check.tolerance(SuiteConfig(tol_global=1e-3)) == 1e-3
    assert check.tolerance(SuiteConfig(tol_global=1e-3, tol_overrides={"a1": 1e-5})) == 1e-5
    assert check.tolerance(SuiteConfig(tol_overrides={"a1-dim2": 2e-5})) == 2e-5
    assert check.tolerance(SuiteConfig(tol_overrides={"a1-dim3": 2e-5})) == 1e-8
    lemma = build_checks(SuiteConfig(only="flow-lemma"))[0]
    assert lemma.tolerance(SuiteConfig(exact=True)) == 0.0
    heat = build_checks(SuiteConfig(only="heat-limit-n1"))[0]
    assert heat.tolerance(SuiteConfig()) == 1e-3


def test_errors_measure():
    assert errors(2.0, 2.0) == (0.0, 0.0)
    assert errors(100.0, 101.0) == (1.0, pytest.approx(1 / 101))
    assert errors(0.001, 0.002) == (pytest.approx(0.001), pytest.approx(0.001))
    assert errors(Jet([1, 2]), Jet([1, 2.5])) == (0.5, pytest.approx(0.5 / 2.5))
    assert errors([1, 2], [1]) == (math.inf, math.inf)
    assert errors(F(1, 3), F(1, 3)) == (0.0, 0.0)


def test_jsonable():
    assert jsonable(F(1, 2)) == "1/2"
    assert jsonable(F(4, 2)) == 2
    assert jsonable(Jet([1, F(1, 3)])) == [1, "1/3"]
    assert jsonable(None) is None
    assert jsonable(float("inf")) == "inf"


def test_report_schema_and_pass_semantics():
    report = run_suite(SuiteConfig(only="a1", dims=(1,), threads=1))
    assert report["summary"] == {"total": 18, "passed": 18, "failed": 0, "all_pass": True}
    for e in report["entries"]:
        for key in ("identity_id", "statement", "inputs_digest", "lhs", "rhs", "abs_err", "rel_err",
                    "tolerance", "pass"):
            assert key in e
        measured = e["rel_err"] if e["error_measure"] == "rel" else e["abs_err"]
        assert e["pass"] == (measured <= e["tolerance"])
    cfg = report["config"]
    assert cfg["quad_order"] == 32 and cfg["jet_order"] == 8 and cfg["arithmetic"] == "float"


def test_report_is_deterministic_across_thread_counts():
    cfg = dict(only="wave-*", dims=(3,))
    a = report_to_json(run_suite(SuiteConfig(threads=1, **cfg)))
    b = report_to_json(run_suite(SuiteConfig(threads=4, **cfg)))
    assert a == b
    assert json.loads(a)["summary"]["all_pass"]


def test_thread_env(monkeypatch):
    monkeypatch.setenv("SDG_KERNEL_THREADS", "2")
    report = run_suite(SuiteConfig(only="transport"))
    assert report["summary"]["all_pass"]


def test_degraded_quadrature_fails_sphere_entries():
    report = run_suite(SuiteConfig(only="a4", quad_order=2, threads=1))
    failing = [e for e in report["entries"] if not e["pass"]]
    assert failing and report["summary"]["all_pass"] is False
    assert all(e["rel_err"] > e["tolerance"] for e in failing)


def test_tight_override_makes_entries_fail():
    report = run_suite(SuiteConfig(only="heat-limit-n1", tol_overrides={"heat-limit-*": 1e-16}, threads=1))
    assert report["summary"]["failed"] > 0


def test_noncompact_test_functions_are_flagged():
    entries = run_suite(SuiteConfig(only="a1", dims=(1,), threads=1))["entries"]
    for e in entries:
        compact = e["inputs"]["phi"].startswith("bump(")
        assert e["flags"] == ([] if compact else ["noncompact-test-function"])
    assert any(not e["flags"] for e in entries) and any(e["flags"] for e in entries)


def test_crashing_check_is_a_failing_entry():
    def boom(m):
        raise ZeroDivisionError("boom")

    check = Check("boom", 1, "raises", {"x": 1}, boom, "quad")
    entry = _evaluate(check, SuiteConfig())
    assert entry["pass"] is False and entry["error"].startswith("ZeroDivisionError")
    assert entry["identity_id"] == "boom-dim1"


def test_rational_mode_is_exact():
    report = run_suite(SuiteConfig(only="flow-*", exact=True, threads=1))
    assert report["summary"]["all_pass"]
    assert all(e["abs_err"] == 0 for e in report["entries"])
    assert report["config"]["arithmetic"] == "rational"


def test_csv_output():
    text = report_to_csv(run_suite(SuiteConfig(only="transport", threads=1)))
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 6
    assert all(r[-1] == "True" for r in rows[1:])
