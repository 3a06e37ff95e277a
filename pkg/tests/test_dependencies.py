import pytest
from pydantic import ValidationError

from paramodular_verify.config import Config, ReportFormat
from paramodular_verify.dependencies import get_config, load_config


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def write_config(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text)
    return path


def test_get_config_is_cached():
    assert get_config() is get_config()


def test_without_file_or_overrides():
    assert load_config() == Config()


def test_flat_keys_reach_every_section(tmp_path):
    path = write_config(tmp_path, "p: 11\nN: 5\nchi_index: 2\ns: 2.4 0.3\nformat: csv\nmax_modulus: 6\n")
    config = load_config(path)
    assert config.group.p == 11
    assert config.group.N == 5
    assert config.eisenstein.p == 11
    assert config.eisenstein.chi_index == 2
    assert config.eisenstein.s == complex(2.4, 0.3)
    assert config.epstein.s == complex(2.4, 0.3)
    assert config.output_format is ReportFormat.CSV
    assert config.characters.max_modulus == 6


def test_sections_pass_through(tmp_path):
    path = write_config(tmp_path, "tolerances:\n  fe: 1.0e-4\nworkers: 2\n")
    config = load_config(path)
    assert config.tolerances.fe == 1e-4
    assert config.tolerances.diff == 1e-6
    assert config.workers == 2


def test_overrides_win_over_file(tmp_path):
    path = write_config(tmp_path, "p: 11\nlog_level: DEBUG\n")
    config = load_config(path, {"p": 13, "N": None})
    assert config.eisenstein.p == 13
    assert config.eisenstein.N == 6
    assert config.log_level == "DEBUG"


def test_invalid_value(tmp_path):
    with pytest.raises(ValidationError):
        load_config(write_config(tmp_path, "precision_bits: 10\n"))


def test_file_must_hold_a_mapping(tmp_path):
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path, "- 1\n- 2\n"))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.yaml")
