"""Pair metrics, label statistics and gradient-statistics export."""

from .metrics import (
    PRF,
    LabelStats,
    MetricsReport,
    evaluate_pairs,
    label_stats,
    pair_prf,
    polarity_prf,
    term_prf,
)
from .export import export_gradient_stats, format_gradient_stats

__all__ = [
    "PRF",
    "LabelStats",
    "MetricsReport",
    "evaluate_pairs",
    "label_stats",
    "pair_prf",
    "polarity_prf",
    "term_prf",
    "export_gradient_stats",
    "format_gradient_stats",
]
