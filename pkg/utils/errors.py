"""
Exception hierarchy for grace-tagger.

The CLI maps each family to an exit code (see EXIT_CODES).
"""

from enum import Enum
from typing import Dict, Optional


class GraceError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GraceError):
    """Invalid or incomplete configuration, or bad command-line usage."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class DataError(GraceError):
    """Malformed or unusable input data."""


class CorpusErrorKind(Enum):
    """Distinct diagnostics raised while reading a tagged corpus."""
    UNKNOWN_TAG = "unknown tag"
    FIELD_COUNT = "field count"
    ORPHAN_INSIDE = "I without B"
    POLARITY_MISMATCH = "polarity/term mismatch"
    INCONSISTENT_POLARITY = "inconsistent in-term polarity"
    EMPTY_TOKEN = "empty token"


class CorpusFormatError(DataError):
    """A corpus line violates the wire format or a sentence invariant."""

    def __init__(self, line: int, kind: CorpusErrorKind, message: str):
        super().__init__(f"line {line}: {kind.value}: {message}")
        self.line = line
        self.kind = kind


class CheckpointError(DataError):
    """A checkpoint file cannot be read, written or matched to a config."""


class ShapeError(GraceError):
    """Operands have incompatible shapes."""


class NumericDomainError(GraceError):
    """Non-finite input, gradient or loss."""

    def __init__(self, message: str, components: Optional[Dict[str, float]] = None):
        if components:
            detail = ", ".join(f"{k}={v!r}" for k, v in components.items())
            message = f"{message} ({detail})"
        super().__init__(message)
        self.components = components or {}


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, NumericDomainError):
        return EXIT_NUMERIC
    if isinstance(error, (DataError, ShapeError, OSError)):
        return EXIT_DATA
    return EXIT_USAGE
