"""
Logging setup: stderr plus a rotating system log.
"""

import logging
import os
import sys

from beamlink.settings import (
    IS_TEST,
    LOG_DIR,
    LOG_HISTORY,
    LOG_LEVEL,
    LOG_SIZE,
    LOG_SYSTEM,
    LOGGING_FMT,
    LOGGING_USE_GZIP,
)

# Optional import - gracefully handle if not installed
try:
    from concurrent_log_handler import ConcurrentRotatingFileHandler

    CONCURRENT_LOG_AVAILABLE = True
except ImportError:
    CONCURRENT_LOG_AVAILABLE = False
    print("Warning: concurrent-log-handler not installed. Using RotatingFileHandler.", file=sys.stderr)

_CONFIGURED = False


def _file_handler() -> logging.Handler:
    os.makedirs(LOG_DIR, exist_ok=True)
    if CONCURRENT_LOG_AVAILABLE:
        return ConcurrentRotatingFileHandler(
            LOG_SYSTEM,
            maxBytes=LOG_SIZE,
            backupCount=LOG_HISTORY,
            use_gzip=LOGGING_USE_GZIP,
        )
    from logging.handlers import RotatingFileHandler

    return RotatingFileHandler(LOG_SYSTEM, maxBytes=LOG_SIZE, backupCount=LOG_HISTORY)


def configure_logging(level: str | None = None) -> None:
    """Install the package handlers once. Later calls only adjust the level."""
    global _CONFIGURED  # pylint: disable=global-statement
    root = logging.getLogger("beamlink")
    root.setLevel((level or LOG_LEVEL).upper())
    if _CONFIGURED:
        return
    formatter = logging.Formatter(LOGGING_FMT)
    stream = logging.StreamHandler()
    stream.setFormatter(formatter)
    root.addHandler(stream)
    if not IS_TEST:
        handler = _file_handler()
        handler.setFormatter(formatter)
        root.addHandler(handler)
    _CONFIGURED = True
