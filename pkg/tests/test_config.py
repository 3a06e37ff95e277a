import pytest
from pydantic import ValidationError

from paramodular_verify.config import (
    Config,
    EisensteinDefaults,
    EpsteinDefaults,
    ReportFormat,
    SuiteName,
    parse_complex,
)


def test_defaults():
    config = Config()
    assert config.log_level == "INFO"
    assert config.workers == 1
    assert config.precision_bits == 53
    assert config.output_format is ReportFormat.JSON
    assert config.suite is SuiteName.ALL
    assert config.eisenstein.s == complex(2.6, 0.0)
    assert config.epstein.radius is None


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("PARAMOD_WORKERS", "4")
    monkeypatch.setenv("LOG_LEVEL", "debug")
    monkeypatch.setenv("EISENSTEIN__P", "11")
    monkeypatch.setenv("TOLERANCES__FE", "0.0001")
    config = Config()
    assert config.workers == 4
    assert config.log_level == "DEBUG"
    assert config.eisenstein.p == 11
    assert config.tolerances.fe == 1e-4


def test_workers_by_field_name():
    assert Config(workers=3).workers == 3


@pytest.mark.parametrize(
    "kwargs",
    [
        {"log_level": "verbose"},
        {"precision_bits": 40},
        {"workers": 0},
        {"output_format": "xml"},
        {"suite": "everything"},
    ],
)
def test_invalid_values(kwargs):
    with pytest.raises(ValidationError):
        Config(**kwargs)


@pytest.mark.parametrize(
    "value,expected",
    [
        ("2.5 1", complex(2.5, 1)),
        ("2.4,0.3", complex(2.4, 0.3)),
        ("2.5", complex(2.5, 0)),
        ([1, 2], complex(1, 2)),
        (3, complex(3, 0)),
        (complex(0, 1), complex(0, 1)),
    ],
)
def test_parse_complex(value, expected):
    assert parse_complex(value) == expected


@pytest.mark.parametrize("value", ["1 2 3", [1, 2, 3], "one"])
def test_parse_complex_rejects(value):
    with pytest.raises(ValueError):
        parse_complex(value)


def test_sections_parse_s():
    assert EisensteinDefaults(s="2.4 0.3").s == complex(2.4, 0.3)
    assert EpsteinDefaults(s=[1.5, -1]).s == complex(1.5, -1)
