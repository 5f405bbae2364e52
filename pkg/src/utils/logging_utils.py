"""
Logger helpers shared by the library modules.
"""

import logging
import os
import sys
from typing import Optional

ROOT_LOGGER = "drmc"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    """
    Return a child of the package logger.

    Args:
        name: Module name, usually ``__name__``

    Returns:
        Logger named ``drmc.<last component of name>``
    """
    return logging.getLogger(f"{ROOT_LOGGER}.{name.rsplit('.', 1)[-1]}")


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a stderr handler to the package logger.

    Args:
        level: Level name; defaults to DRMC_LOG_LEVEL or INFO

    Returns:
        The configured package logger
    """
    level = (level or os.getenv("DRMC_LOG_LEVEL") or "INFO").upper()
    logger = logging.getLogger(ROOT_LOGGER)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger
