"""Logging configuration for the entanglement CLI."""

import sys
import warnings
from typing import Optional

from loguru import logger

from app.models.config import settings


def _warning_to_log(message, category, filename, lineno, file=None, line=None) -> None:
    logger.warning("{}: {}", category.__name__, message)


def setup_logger(log_level: Optional[str] = None) -> None:
    """Configure logger for the application.

    Python warnings that escape the services (regime warnings outside sweeps)
    are routed to the same sink.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL); defaults
            to ``settings.log_level``.
    """
    level = (log_level or settings.log_level).upper()
    logger.remove()
    logger.add(
        sys.stderr,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
        level=level,
        colorize=True,
    )
    warnings.showwarning = _warning_to_log

    logger.debug("Logger initialized with level: {}", level)
