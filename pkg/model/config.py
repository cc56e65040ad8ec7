"""
Network shape configuration.
"""

from dataclasses import dataclass
from typing import List

from utils.validators import (
    validate_non_negative_int,
    validate_positive_int,
    validate_unit_interval,
)


@dataclass
class EncoderConfig:
    """Sizes of the encoder, the ASC decoder and the heads."""

    layers: int = 4          # L, total encoder layers
    shared_layers: int = 3   # l, layers shared by both tasks
    hidden: int = 64
    heads: int = 4
    ffn: int = 256
    vocab_size: int = 0      # filled in from the vocabulary
    max_len: int = 128
    asc_layers: int = 2      # 0 = direct linear ASC head on layer l
    dropout: float = 0.1

    @property
    def head_dim(self) -> int:
        return self.hidden // self.heads

    def validate(self) -> List[str]:
        """
        Validate shape settings.

        Returns:
            List of error messages. Empty list if the configuration is valid.
        """
        errors = []

        for name in ("layers", "shared_layers", "hidden", "heads", "ffn", "max_len"):
            is_valid, error_msg = validate_positive_int(getattr(self, name), name)
            if not is_valid:
                errors.append(error_msg)

        is_valid, error_msg = validate_non_negative_int(self.vocab_size, "vocab_size")
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_non_negative_int(self.asc_layers, "asc_layers")
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_unit_interval(self.dropout, "dropout")
        if not is_valid:
            errors.append(error_msg)

        if errors:
            return errors

        if self.shared_layers > self.layers:
            errors.append(f"shared_layers ({self.shared_layers}) must not exceed layers ({self.layers})")
        if self.hidden % self.heads:
            errors.append(f"hidden ({self.hidden}) must be divisible by heads ({self.heads})")
        if self.asc_layers > self.layers:
            errors.append(
                f"asc_layers ({self.asc_layers}) must not exceed layers ({self.layers}); "
                "decoder blocks are initialized from the top encoder layers"
            )
        if self.max_len < 2:
            errors.append(f"max_len must leave room for [CLS] and [SEP], got: {self.max_len}")

        return errors
