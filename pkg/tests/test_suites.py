import math

import pytest

from paramodular_verify.characters import character
from paramodular_verify.config import SuiteName
from paramodular_verify.eisenstein import EisensteinParams
from paramodular_verify.exceptions import PreconditionError
from paramodular_verify.majorant import SiegelPoint
from paramodular_verify.suites import (
    FE_GRID,
    SUITES,
    Case,
    build_cases,
    check_achisum,
    check_cosets,
    check_smartsum,
    run_cases,
    run_suite,
)
from paramodular_verify.symplectic import GroupContext


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def broken_check():
    raise PreconditionError("p = 5 is not 1 mod 6")


def dump(report):
    return [case.model_dump() for case in report.cases]


def test_every_suite_is_registered():
    assert set(SUITES) == set(SuiteName) - {SuiteName.ALL}


def test_build_cases(small_config):
    chars = build_cases("chars", small_config)
    assert chars
    assert all(isinstance(case, Case) for case in chars)
    everything = build_cases(SuiteName.ALL, small_config)
    assert len(everything) == sum(len(suite(small_config)) for suite in SUITES.values())


def test_cases_are_deterministic(small_config):
    first = [(case.name, case.params) for case in build_cases("group", small_config)]
    second = [(case.name, case.params) for case in build_cases("group", small_config)]
    assert first == second


@pytest.mark.parametrize("suite", ["chars", "achisum"])
def test_character_suites_pass(small_config, suite):
    report = run_suite(suite, small_config)
    assert report.suite == suite
    assert report.summary.total > 0
    assert report.ok, [case.name for case in report.cases if not case.passed]


@pytest.mark.slow
def test_series_suite_passes(small_config):
    report = run_suite("series", small_config)
    assert report.ok, [case.name for case in report.cases if not case.passed]


def test_failures_are_reported(small_config, caplog):
    case = Case("broken", {"p": 5, "N": 6}, broken_check)
    report = run_cases("demo", [case], small_config)
    assert report.exit_code() == 1
    result = report.cases[0]
    assert result.name == "broken"
    assert result.lhs == "PreconditionError: p = 5 is not 1 mod 6"
    assert "case broken" in caplog.text


def test_tolerances_are_reported(small_config):
    report = run_cases("demo", [], small_config)
    assert report.tolerances["fe"] == small_config.tolerances.fe
    assert report.summary.total == 0


@pytest.mark.integration
def test_worker_count_does_not_change_results(small_config):
    cases = build_cases("achisum", small_config)
    serial = run_cases("achisum", cases, small_config)
    parallel = run_cases("achisum", cases, small_config.model_copy(update={"workers": 2}))
    assert dump(serial) == dump(parallel)


# ---------------------------------------------------------
# Reported, not asserted
# ---------------------------------------------------------
def test_imprimitive_achisum_rows_are_reported():
    rows = check_achisum("achisum", {"N": 4, "chi": 0, "nu": 2}, N=4, index=0, nu=2, tolerance=1e-9)
    assert [row.name for row in rows] == ["achisum.multiplicative", "achisum.multiplicative.all_m", "achisum.closed_form"]
    assert rows[0].tolerance == 1e-9
    assert rows[0].passed
    for row in rows[1:]:
        assert row.params["asserted"] is False
        assert row.tolerance == math.inf
        assert row.passed
        assert 0 <= row.params["discrepancies"] <= row.params["checked"] == 8


def test_primitive_achisum_rows_are_asserted():
    rows = check_achisum("achisum", {"N": 4, "chi": 1, "nu": 2}, N=4, index=1, nu=2, tolerance=1e-9)
    assert [row.name for row in rows] == ["achisum.multiplicative", "achisum.closed_form"]
    assert all(row.tolerance == 1e-9 and row.passed for row in rows)


def test_coset_count_row_states_both_counts():
    _, count = check_cosets("group.cosets", {"p": 7, "N": 2, "nu": 2}, ctx=GroupContext(p=7, N=2), nu=2)
    assert count.params["theta"] == 1
    assert count.params["built"] == 16
    assert count.params["stated"] == 20
    assert count.params["asserted"] is False
    assert count.passed


def test_fe_grid_has_an_even_complex_character():
    characters = [character(n, index) for _, n, _, index in FE_GRID]
    assert any(chi.is_even() and not (chi**2).is_principal() for chi in characters)


@pytest.mark.slow
@pytest.mark.integration
def test_smartsum_reports_the_conjugate_reading():
    eisenstein = EisensteinParams(
        ctx=GroupContext(p=29, N=7),
        chi=character(7, 2),
        point=SiegelPoint.parse("0.1 0.2 -0.3 1.2 0.3 0.9"),
        s=2.4,
    )
    stated, conjugate = check_smartsum("smartsum", {}, eisenstein=eisenstein, tolerance=1e-5)
    assert stated.passed
    assert stated.rel_err == pytest.approx(stated.abs_err / max(abs(stated.lhs), abs(stated.rhs)))
    assert conjugate.name == "smartsum.conjugate_lhs"
    assert conjugate.tolerance == math.inf
