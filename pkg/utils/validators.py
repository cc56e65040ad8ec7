"""
Validation functions for grace-tagger configuration values.

Each validator returns a tuple of (is_valid, error_message) so config
classes can collect every problem before raising.
"""

import math
from typing import Optional, Tuple


def validate_positive_int(value: int, name: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a strictly positive integer.

    Args:
        value: The value to validate
        name: Field name used in the error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, int):
        return False, f"{name} must be an integer"

    if value < 1:
        return False, f"{name} must be at least 1, got: {value}"

    return True, None


def validate_non_negative_int(value: int, name: str) -> Tuple[bool, Optional[str]]:
    """Validate an integer >= 0."""
    if isinstance(value, bool) or not isinstance(value, int):
        return False, f"{name} must be an integer"

    if value < 0:
        return False, f"{name} must not be negative, got: {value}"

    return True, None


def validate_positive_float(value: float, name: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a strictly positive, finite real number.

    Args:
        value: The value to validate
        name: Field name used in the error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False, f"{name} must be a number"

    if not math.isfinite(value):
        return False, f"{name} must be finite, got: {value}"

    if value <= 0:
        return False, f"{name} must be positive, got: {value}"

    return True, None


def validate_unit_interval(
    value: float,
    name: str,
    include_one: bool = False,
) -> Tuple[bool, Optional[str]]:
    """
    Validate a value in [0, 1) (or [0, 1] with include_one).

    Used for momentum, dropout and warmup fractions.
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False, f"{name} must be a number"

    upper_ok = value <= 1 if include_one else value < 1
    if not (0 <= value and upper_ok):
        bound = "[0, 1]" if include_one else "[0, 1)"
        return False, f"{name} must lie in {bound}, got: {value}"

    return True, None


def validate_choice(value: str, name: str, choices: Tuple[str, ...]) -> Tuple[bool, Optional[str]]:
    """Validate that a string is one of a fixed set of options."""
    if value not in choices:
        options = ", ".join(f"'{c}'" for c in choices)
        return False, f"{name} must be one of {options}, got: {value}"

    return True, None
