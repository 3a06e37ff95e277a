import csv
import io
import json
import math
from fractions import Fraction

import pytest

from paramodular_verify.formatters import (
    CSV_COLUMNS,
    CaseResult,
    VerificationReport,
    emit_report,
    format_csv,
    format_json,
    format_text,
)


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def sample_report():
    cases = [
        CaseResult.numeric("close", {"N": 3, "chi": 1}, complex(1.0, 0.5), complex(1.0, 0.5 + 1e-12), 1e-9),
        CaseResult.exact("exact", {"R": 6}, Fraction(1, 3), Fraction(1, 3)),
        CaseResult.failure("broken", {"p": 5}, ValueError("p must be 1 mod N")),
    ]
    report = VerificationReport(suite="demo", tolerances={"fe": 1e-5}, cases=cases)
    report.summary.wall_time = 0.25
    return report


# ---------------------------------------------------------
# Case results
# ---------------------------------------------------------
def test_numeric_result():
    result = CaseResult.numeric("x", {}, 2.0, 2.0 + 1e-10, 1e-9)
    assert result.passed
    assert result.abs_err == pytest.approx(1e-10)
    assert result.rel_err == pytest.approx(5e-11)
    assert result.lhs == complex(2.0)


def test_numeric_result_with_scale():
    result = CaseResult.numeric("x", {}, 1e-3, 0.0, 1e-2, scale=1.0)
    assert result.passed
    assert result.rel_err == pytest.approx(1e-3)


def test_both_sides_zero_pass():
    assert CaseResult.numeric("x", {}, 0.0, 0.0, 0.0).passed


def test_non_finite_values_fail():
    assert not CaseResult.numeric("x", {}, math.nan, 1.0, 1.0).passed
    assert not CaseResult.numeric("x", {}, math.inf, 1.0, math.inf).passed


def test_exact_result():
    assert CaseResult.exact("x", {}, Fraction(1, 2), Fraction(2, 4)).lhs == "1/2"
    result = CaseResult.exact("x", {}, 16, 20)
    assert not result.passed
    assert result.rel_err == 1.0


def test_failure_result():
    result = CaseResult.failure("x", {"p": 5}, ValueError("boom"))
    assert not result.passed
    assert result.lhs == "ValueError: boom"
    assert math.isinf(result.rel_err)


def test_pass_alias():
    result = CaseResult.model_validate({"name": "x", "lhs": [1, 2], "rhs": 3, "pass": False})
    assert result.lhs == complex(1, 2)
    assert result.rhs == complex(3)
    assert not result.passed


# ---------------------------------------------------------
# Reports
# ---------------------------------------------------------
def test_summary_and_exit_code():
    report = sample_report()
    assert (report.summary.total, report.summary.passed, report.summary.failed) == (3, 2, 1)
    assert not report.ok
    assert report.exit_code() == 1
    assert VerificationReport(suite="empty").exit_code() == 0


def test_json_format():
    data = json.loads(format_json(sample_report()))
    assert data["suite"] == "demo"
    assert data["tolerances"] == {"fe": 1e-5}
    assert data["summary"] == {"total": 3, "passed": 2, "failed": 1}
    first = data["cases"][0]
    assert first["lhs"] == [1.0, 0.5]
    assert first["pass"] is True
    assert first["params"] == {"N": 3, "chi": 1}
    assert data["cases"][2]["rel_err"] == math.inf


def test_csv_format():
    rows = list(csv.reader(io.StringIO(format_csv(sample_report()))))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 4
    close = dict(zip(CSV_COLUMNS, rows[1], strict=True))
    assert close["suite"] == "demo"
    assert json.loads(close["params"]) == {"N": 3, "chi": 1}
    assert float(close["lhs_im"]) == 0.5
    assert close["pass"] == "true"
    exact = dict(zip(CSV_COLUMNS, rows[2], strict=True))
    assert exact["lhs_re"] == "1/3"
    assert exact["lhs_im"] == ""
    assert rows[3][-1] == "false"


def test_text_format():
    text = format_text(sample_report())
    lines = text.splitlines()
    assert lines[0] == "suite demo"
    assert lines[1].startswith("[PASS] close N=3 chi=1")
    assert "[FAIL] broken p=5" in text
    assert "    lhs = ValueError: p must be 1 mod N" in lines
    assert lines[-1] == "3 cases: 2 passed, 1 failed (0.25 s)"


@pytest.mark.parametrize("fmt,prefix", [("json", "{"), ("csv", "suite,name"), ("text", "suite demo")])
def test_emit_report(fmt, prefix):
    assert emit_report(sample_report(), fmt).startswith(prefix)
