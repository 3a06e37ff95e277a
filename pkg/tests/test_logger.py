import logging

import pytest
from uvicorn.logging import DefaultFormatter

from paramodular_verify.logger import setup_logger


@pytest.mark.parametrize("level", ["debug", "WARNING"])
def test_setup_logger(level):
    setup_logger(level, use_colors=False)
    root = logging.getLogger()
    assert root.level == getattr(logging, level.upper())
    assert any(isinstance(handler.formatter, DefaultFormatter) for handler in root.handlers)


def test_setup_logger_rejects_unknown_level():
    with pytest.raises(AssertionError):
        setup_logger("loud")
