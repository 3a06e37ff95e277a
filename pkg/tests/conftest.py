import logging

import pytest

from paramodular_verify.config import CharacterDefaults, Config, GroupDefaults
from paramodular_verify.dependencies import get_config


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("PARAMOD_WORKERS", "LOG_LEVEL", "PRECISION_BITS", "OUTPUT_FORMAT", "SUITE"):
        monkeypatch.delenv(name, raising=False)
    get_config.cache_clear()
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    get_config.cache_clear()


@pytest.fixture
def small_config() -> Config:
    """A configuration whose suites finish in seconds."""
    return Config(
        characters=CharacterDefaults(max_modulus=4, max_gauss_modulus=5),
        group=GroupDefaults(pairs=[(7, 6)], words=20, word_length=4, character_pairs=10, coset_levels=[1, 2]),
    )
