"""
Centralized logging configuration for grace-tagger.
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

from rich.logging import RichHandler


# Default log directory follows the XDG Base Directory layout
DEFAULT_LOG_DIR = Path.home() / ".local" / "share" / "grace-tagger"
DEFAULT_LOG_FILE = "debug.log"
DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_LOG_SIZE = 5 * 1024 * 1024  # 5 MB
MAX_LOG_BACKUPS = 3

ROOT_LOGGER_NAME = "grace_tagger"

# Track if logging has been configured
_logging_configured = False


def setup_logging(
    level: int = logging.DEBUG,
    log_dir: Path | None = None,
    log_file: str = DEFAULT_LOG_FILE,
    enabled: bool | None = None,
    console: bool = False,
) -> logging.Logger:
    """
    Set up centralized logging for the application.

    Args:
        level: Logging level (default: DEBUG)
        log_dir: Directory for log files (default: ~/.local/share/grace-tagger)
        log_file: Name of the log file (default: debug.log)
        enabled: Whether file logging is enabled. If None, checks GRACE_DEBUG env var.
        console: Also log to stderr through a rich handler (CLI --verbose).

    Returns:
        The root logger for the application.
    """
    global _logging_configured

    if enabled is None:
        enabled = os.environ.get("GRACE_DEBUG", "").lower() in ("1", "true", "yes")

    root_logger = logging.getLogger(ROOT_LOGGER_NAME)

    # Only configure once
    if _logging_configured:
        return root_logger

    if not enabled and not console:
        root_logger.addHandler(logging.NullHandler())
        root_logger.setLevel(logging.WARNING)
        _logging_configured = True
        return root_logger

    if enabled:
        if log_dir is None:
            log_dir = DEFAULT_LOG_DIR
        log_dir.mkdir(parents=True, exist_ok=True)

        handler = RotatingFileHandler(
            log_dir / log_file,
            maxBytes=MAX_LOG_SIZE,
            backupCount=MAX_LOG_BACKUPS,
        )
        handler.setLevel(level)
        handler.setFormatter(logging.Formatter(DEFAULT_LOG_FORMAT))
        root_logger.addHandler(handler)

    if console:
        console_handler = RichHandler(show_path=False, markup=False)
        console_handler.setLevel(level)
        root_logger.addHandler(console_handler)

    root_logger.setLevel(level)

    _logging_configured = True
    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for a specific module.

    Args:
        name: The module name (typically __name__)

    Returns:
        A logger instance that is a child of the application root logger.
    """
    if name.startswith(f"{ROOT_LOGGER_NAME}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
