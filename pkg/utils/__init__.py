"""Logging, errors and validation helpers shared by every package."""

from .logging import setup_logging, get_logger
from .errors import (
    CheckpointError,
    ConfigError,
    CorpusErrorKind,
    CorpusFormatError,
    DataError,
    GraceError,
    NumericDomainError,
    ShapeError,
    exit_code_for,
)

__all__ = [
    "setup_logging",
    "get_logger",
    "CheckpointError",
    "ConfigError",
    "CorpusErrorKind",
    "CorpusFormatError",
    "DataError",
    "GraceError",
    "NumericDomainError",
    "ShapeError",
    "exit_code_for",
]
