"""
Training configuration and its key=value file format.

Files hold one `key=value` per line, `#` starts a comment line, and nested
settings use dotted keys (`model.layers=4`, `vat.eps=2.0`). Loading
requires every key and rejects unknown ones.
"""

from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple

from losses.vat import VatConfig
from model.config import EncoderConfig
from utils.errors import ConfigError
from utils.validators import (
    validate_choice,
    validate_non_negative_int,
    validate_positive_float,
    validate_positive_int,
    validate_unit_interval,
)


POLARITY_STRATEGIES = ("first-token", "majority")
TRUE_WORDS = ("true", "yes", "1", "on")
FALSE_WORDS = ("false", "no", "0", "off")


@dataclass
class TrainConfig:
    """Everything a two-stage training run needs."""

    seed: int = 13

    # Stage 1: ATE only, then ATE with VAT
    stage1_epochs: int = 5
    stage1_vat_epochs: int = 1
    lr_stage1: float = 3e-5
    lr_stage1_vat: float = 1e-5

    # Stage 2: both branches
    stage2_epochs: int = 10
    lr_stage2_asc: float = 3e-5
    lr_stage2_ate: float = 3e-6

    batch: int = 32
    eval_batch: int = 64
    warmup: float = 0.1        # fraction of each phase's steps
    grad_clip: float = 1.0
    min_count: int = 1

    # Gradient-harmonized loss
    use_ghm: bool = True
    ghm_bins: int = 24
    ghm_momentum: float = 0.75
    ghm_ema: bool = True

    use_vat: bool = True
    ate_only: bool = False     # stop after stage 1

    # Decoding
    consistent_polarity: bool = False
    polarity_strategy: str = "first-token"

    model: EncoderConfig = field(default_factory=EncoderConfig)
    vat: VatConfig = field(default_factory=VatConfig)

    def validate(self) -> List[str]:
        """
        Validate every setting, nested ones included.

        Returns:
            List of error messages. Empty list if the configuration is valid.
        """
        errors = []

        for name in ("stage1_epochs", "stage2_epochs", "batch", "eval_batch", "min_count", "ghm_bins"):
            is_valid, error_msg = validate_positive_int(getattr(self, name), name)
            if not is_valid:
                errors.append(error_msg)

        is_valid, error_msg = validate_non_negative_int(self.stage1_vat_epochs, "stage1_vat_epochs")
        if not is_valid:
            errors.append(error_msg)

        for name in ("lr_stage1", "lr_stage1_vat", "lr_stage2_asc", "lr_stage2_ate", "grad_clip"):
            is_valid, error_msg = validate_positive_float(getattr(self, name), name)
            if not is_valid:
                errors.append(error_msg)

        is_valid, error_msg = validate_unit_interval(self.warmup, "warmup", include_one=True)
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_unit_interval(self.ghm_momentum, "ghm_momentum")
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_choice(self.polarity_strategy, "polarity_strategy", POLARITY_STRATEGIES)
        if not is_valid:
            errors.append(error_msg)

        errors.extend(f"model.{e}" for e in self.model.validate())
        errors.extend(self.vat.validate())
        return errors

    def check(self) -> "TrainConfig":
        """Raise ConfigError listing every problem; returns self otherwise."""
        errors = self.validate()
        if errors:
            raise ConfigError("invalid configuration: " + "; ".join(errors))
        return self

    # --- key=value form ---

    def to_items(self) -> List[Tuple[str, Any]]:
        """(dotted key, value) pairs in declaration order."""
        return list(_flatten(self))

    def to_text(self) -> str:
        return "".join(f"{key}={_format(value)}\n" for key, value in self.to_items())

    def save(self, path: Path) -> None:
        """Write every key in declaration order."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_text())

    @classmethod
    def from_lines(cls, lines: Iterable[str], source: str = "<config>") -> "TrainConfig":
        values: Dict[str, str] = {}
        for line_no, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"{source}:{line_no}: expected key=value, got '{line}'")
            if key in values:
                raise ConfigError(f"{source}:{line_no}: duplicate key '{key}'", key=key)
            values[key] = value.strip()

        expected = [key for key, _ in _flatten(cls())]
        unknown = [key for key in values if key not in expected]
        if unknown:
            raise ConfigError(f"{source}: unknown key '{unknown[0]}'", key=unknown[0])
        missing = [key for key in expected if key not in values]
        if missing:
            raise ConfigError(f"{source}: missing key '{missing[0]}'", key=missing[0])

        return _build(cls, values, "")

    @classmethod
    def load(cls, path: Path) -> "TrainConfig":
        """Load a config file; every key must be present."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_lines(f, source=str(path))


def _flatten(obj, prefix: str = ""):
    for f in fields(obj):
        value = getattr(obj, f.name)
        if is_dataclass(value):
            yield from _flatten(value, f"{prefix}{f.name}.")
        else:
            yield f"{prefix}{f.name}", value


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(key: str, raw: str, kind) -> Any:
    try:
        if kind is bool:
            lowered = raw.lower()
            if lowered in TRUE_WORDS:
                return True
            if lowered in FALSE_WORDS:
                return False
            raise ValueError(f"'{raw}' is not a boolean")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as e:
        raise ConfigError(f"bad value for '{key}': {e}", key=key) from None


def _build(cls, values: Dict[str, str], prefix: str):
    kwargs = {}
    for f in fields(cls):
        key = f"{prefix}{f.name}"
        if isinstance(f.type, type) and is_dataclass(f.type):
            kwargs[f.name] = _build(f.type, values, key + ".")
        else:
            kwargs[f.name] = _coerce(key, values[key], f.type)
    return cls(**kwargs)
