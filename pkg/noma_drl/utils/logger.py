"""
Centralized logging configuration for the NOMA-DRL package
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from ..config.settings import get_settings

PACKAGE_LOGGER = "noma_drl"


def setup_logger(
    name: str = PACKAGE_LOGGER,
    log_level: Optional[str] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Set up a logger with both file and console handlers.

    Args:
        name: Logger name
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR). Defaults to
            the NOMA_DRL_LOG_LEVEL setting.
        log_file: Optional path to log file. If None, uses the
            NOMA_DRL_LOG_FILE setting ('logs/noma_drl.log' by default)

    Returns:
        Configured logger instance
    """
    settings = get_settings()
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (log_level or settings.log_level).upper(), logging.INFO))

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    log_path = Path(log_file or settings.log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    detailed_formatter = logging.Formatter(
        '[%(asctime)s] [%(name)s] [%(levelname)s] [%(funcName)s:%(lineno)d] %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_formatter = logging.Formatter(
        '[%(levelname)s] %(message)s'
    )

    file_handler = logging.FileHandler(str(log_path), encoding='utf-8')
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(detailed_formatter)
    logger.addHandler(file_handler)

    # Console goes to stderr; stdout is reserved for CSV output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    return logger


def get_logger(name: str = PACKAGE_LOGGER) -> logging.Logger:
    """
    Get a logger below the package logger.

    Handlers live on the package logger only; dotted children such as
    'noma_drl.jra' propagate to it.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    root = logging.getLogger(PACKAGE_LOGGER)
    if not root.handlers:
        setup_logger(PACKAGE_LOGGER)
    return logging.getLogger(name)
