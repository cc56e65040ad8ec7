"""Span extraction, pair decoding and consistent-polarity scoring."""

from .spans import (
    FIRST_TOKEN,
    MAJORITY,
    STRATEGIES,
    AspectPolarityPair,
    DecodeCounters,
    TokenBoundaries,
    decode_pairs,
    extract_boundaries,
    format_pairs,
    is_valid_bio,
    parse_pairs,
    repair_bio,
    repair_bio_ids,
    tags_from_boundaries,
    tags_from_pairs,
)

__all__ = [
    "FIRST_TOKEN",
    "MAJORITY",
    "STRATEGIES",
    "AspectPolarityPair",
    "DecodeCounters",
    "TokenBoundaries",
    "decode_pairs",
    "extract_boundaries",
    "format_pairs",
    "is_valid_bio",
    "parse_pairs",
    "repair_bio",
    "repair_bio_ids",
    "tags_from_boundaries",
    "tags_from_pairs",
]
