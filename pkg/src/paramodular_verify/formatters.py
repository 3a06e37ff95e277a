import csv
import io
import json
import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from paramodular_verify.config import ReportFormat


Value = complex | str | None


class CaseResult(BaseModel):
    """One checked identity: lhs against rhs, the error measures and the verdict."""

    model_config = ConfigDict(populate_by_name=True)

    name: str
    params: dict[str, Any] = Field(default_factory=dict)
    lhs: Value = None
    rhs: Value = None
    abs_err: float = 0.0
    rel_err: float = 0.0
    tail_bound: float | None = None
    tolerance: float = 0.0
    passed: bool = Field(default=True, alias="pass")

    @field_validator("lhs", "rhs", mode="before")
    @classmethod
    def from_pair(cls, value: object) -> object:
        if isinstance(value, list | tuple) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, int | float) and not isinstance(value, bool):
            return complex(value)
        return value

    @classmethod
    def numeric(
        cls,
        name: str,
        params: dict[str, Any],
        lhs: complex,
        rhs: complex,
        tolerance: float,
        scale: float | None = None,
        tail_bound: float | None = None,
    ) -> "CaseResult":
        """rel_err = |lhs - rhs| / scale, scale defaulting to max(|lhs|, |rhs|); passes when rel_err <= tolerance."""
        lhs, rhs = complex(lhs), complex(rhs)
        abs_err = abs(lhs - rhs)
        if scale is None:
            scale = max(abs(lhs), abs(rhs))
        rel_err = abs_err / scale if scale > 0 else abs_err
        passed = math.isfinite(rel_err) and rel_err <= tolerance
        return cls(
            name=name,
            params=params,
            lhs=lhs,
            rhs=rhs,
            abs_err=abs_err,
            rel_err=rel_err,
            tail_bound=tail_bound,
            tolerance=tolerance,
            passed=passed,
        )

    @classmethod
    def exact(cls, name: str, params: dict[str, Any], lhs: object, rhs: object) -> "CaseResult":
        """Zero-tolerance comparison of exact values (booleans, integers, fractions, matrices)."""
        passed = lhs == rhs
        error = 0.0 if passed else 1.0
        return cls(
            name=name, params=params, lhs=str(lhs), rhs=str(rhs), abs_err=error, rel_err=error, passed=passed
        )

    @classmethod
    def failure(cls, name: str, params: dict[str, Any], error: Exception) -> "CaseResult":
        return cls(
            name=name,
            params=params,
            lhs=f"{type(error).__name__}: {error}",
            abs_err=math.inf,
            rel_err=math.inf,
            passed=False,
        )


class ReportSummary(BaseModel):
    total: int = 0
    passed: int = 0
    failed: int = 0
    wall_time: float = Field(default=0.0, exclude=True)


class VerificationReport(BaseModel):
    suite: str
    tolerances: dict[str, float] = Field(default_factory=dict)
    cases: list[CaseResult] = Field(default_factory=list)
    summary: ReportSummary = Field(default_factory=ReportSummary)

    @model_validator(mode="after")
    def count_cases(self) -> "VerificationReport":
        passed = sum(case.passed for case in self.cases)
        self.summary.total = len(self.cases)
        self.summary.passed = passed
        self.summary.failed = len(self.cases) - passed
        return self

    @property
    def ok(self) -> bool:
        return self.summary.failed == 0

    def exit_code(self) -> int:
        return 0 if self.ok else 1


CSV_COLUMNS = [
    "suite",
    "name",
    "params",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "abs_err",
    "rel_err",
    "tail_bound",
    "tolerance",
    "pass",
]


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, float | int | bool | str) or value is None:
        return value
    return str(value)


def _number(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def _parts(value: Value) -> tuple[str, str]:
    """Real and imaginary part for numeric values, the text and an empty field otherwise."""
    if isinstance(value, complex):
        return _number(value.real), _number(value.imag)
    return ("" if value is None else value), ""


def format_json(report: VerificationReport) -> str:
    """
    JSON with shortest round-trip floats; complex values are [re, im]. Wall time is left out.

    Output:
        {
          "suite": "achisum",
          "tolerances": {"achisum": 1e-09},
          "cases": [{"name": "...", "params": {...}, "lhs": [0.5, 0.0], ..., "pass": true}],
          "summary": {"total": 1, "passed": 1, "failed": 0}
        }
    """
    body = report.model_dump(by_alias=True)
    return json.dumps(_jsonable(body), indent=2) + "\n"


def format_csv(report: VerificationReport) -> str:
    """One row per case; numbers with 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for case in report.cases:
        lhs_re, lhs_im = _parts(case.lhs)
        rhs_re, rhs_im = _parts(case.rhs)
        writer.writerow(
            [
                report.suite,
                case.name,
                json.dumps(_jsonable(case.params), sort_keys=True),
                lhs_re,
                lhs_im,
                rhs_re,
                rhs_im,
                _number(case.abs_err),
                _number(case.rel_err),
                _number(case.tail_bound),
                _number(case.tolerance),
                "true" if case.passed else "false",
            ]
        )
    return buffer.getvalue()


def _text_value(value: Value) -> str:
    if isinstance(value, complex):
        if value.imag == 0:
            return _number(value.real)
        return f"{_number(value.real)}{'+' if value.imag >= 0 else '-'}{_number(abs(value.imag))}i"
    return "" if value is None else value


def format_text(report: VerificationReport) -> str:
    """
    Human readable listing.

    Output:
        suite achisum
        [PASS] achisum N=3 chi=1 nu=1  rel_err=0  tol=1.0000000000000001e-09
        ...
        3 cases: 3 passed, 0 failed (0.12 s)
    """
    lines = [f"suite {report.suite}"]
    for case in report.cases:
        verdict = "PASS" if case.passed else "FAIL"
        params = " ".join(f"{k}={_jsonable(v)}" for k, v in case.params.items())
        lines.append(f"[{verdict}] {case.name} {params}  rel_err={_number(case.rel_err)}  tol={_number(case.tolerance)}")
        if not case.passed:
            lines.append(f"    lhs = {_text_value(case.lhs)}")
            lines.append(f"    rhs = {_text_value(case.rhs)}")
    summary = report.summary
    lines.append(
        f"{summary.total} cases: {summary.passed} passed, {summary.failed} failed ({summary.wall_time:.2f} s)"
    )
    return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, format: ReportFormat | str = ReportFormat.JSON) -> str:  # noqa: A002
    format = ReportFormat(format)
    if format is ReportFormat.JSON:
        return format_json(report)
    if format is ReportFormat.CSV:
        return format_csv(report)
    return format_text(report)
