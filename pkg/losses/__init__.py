"""Gradient-harmonized cross-entropy and virtual adversarial training."""

from .ghm import (
    GradientHistogram,
    HistogramSnapshot,
    bin_index,
    exact_density,
    ghm_cross_entropy,
    gradient_norm,
    update_and_weights,
)
from .vat import VatConfig, VatCounters, adversarial_perturbation, vat_loss

__all__ = [
    "GradientHistogram",
    "HistogramSnapshot",
    "bin_index",
    "exact_density",
    "ghm_cross_entropy",
    "gradient_norm",
    "update_and_weights",
    "VatConfig",
    "VatCounters",
    "adversarial_perturbation",
    "vat_loss",
]
