"""
Gradient-harmonized cross-entropy.

Each label's difficulty is its gradient norm g = 1 - p[true class]. Labels
are binned into m equal unit regions of [0, 1]; a label's weight is the
batch size divided by the estimated gradient density of its region, so
over-populated (usually easy) regions are down-weighted.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from numcore import ops
from numcore.tensor import DiffTensor
from utils.errors import ShapeError
from utils.logging import get_logger
from utils.validators import validate_positive_int, validate_unit_interval


logger = get_logger(__name__)

DEFAULT_BINS = 24
DEFAULT_MOMENTUM = 0.75


@dataclass
class HistogramSnapshot:
    """Counts of one task's histogram at the end of an epoch."""
    epoch: int
    task: str
    counts: np.ndarray   # labels per bin accumulated over the epoch
    ema: np.ndarray      # running counts A at the end of the epoch
    n_labels: int

    @property
    def bins(self) -> int:
        return len(self.counts)


@dataclass
class GradientHistogram:
    """
    Unit-region counts of gradient norms.

    `counts` (U) holds the most recent batch, `ema` (A) the momentum-smoothed
    counts. Epoch totals are kept separately for snapshots.
    """
    bins: int = DEFAULT_BINS
    momentum: float = DEFAULT_MOMENTUM
    counts: np.ndarray = None
    ema: np.ndarray = None
    n_labels: int = 0
    updates: int = 0
    epoch_counts: np.ndarray = None
    epoch_labels: int = 0
    cold_start_fallbacks: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.bins, dtype=np.int64)
        if self.ema is None:
            self.ema = np.zeros(self.bins, dtype=np.float64)
        if self.epoch_counts is None:
            self.epoch_counts = np.zeros(self.bins, dtype=np.int64)

    def validate(self) -> List[str]:
        errors = []
        is_valid, error_msg = validate_positive_int(self.bins, "ghm_bins")
        if not is_valid:
            errors.append(error_msg)
        is_valid, error_msg = validate_unit_interval(self.momentum, "ghm_momentum")
        if not is_valid:
            errors.append(error_msg)
        return errors

    @property
    def epsilon(self) -> float:
        return 1.0 / self.bins

    def edges(self) -> np.ndarray:
        """m + 1 region boundaries 0, ε, 2ε, ..., 1."""
        return np.arange(self.bins + 1, dtype=np.float64) / self.bins

    def record(self, bin_ids: np.ndarray) -> np.ndarray:
        """Count one batch into U (and the epoch totals); returns U."""
        self.counts = np.bincount(bin_ids, minlength=self.bins).astype(np.int64)
        self.n_labels = int(len(bin_ids))
        self.epoch_counts += self.counts
        self.epoch_labels += self.n_labels
        self.updates += 1
        return self.counts

    def smooth(self) -> np.ndarray:
        """A ← αA + (1 − α)U."""
        self.ema = self.momentum * self.ema + (1.0 - self.momentum) * self.counts
        return self.ema

    def snapshot(self, epoch: int, task: str) -> HistogramSnapshot:
        return HistogramSnapshot(epoch, task, self.epoch_counts.copy(), self.ema.copy(), self.epoch_labels)

    def reset_epoch(self) -> None:
        self.epoch_counts = np.zeros(self.bins, dtype=np.int64)
        self.epoch_labels = 0


def gradient_norm(p: Sequence[float], true_class: int) -> float:
    """g = 1 - p[true_class]."""
    p = np.asarray(p, dtype=np.float64)
    if not 0 <= true_class < p.shape[-1]:
        raise ValueError(f"true class {true_class} outside 0..{p.shape[-1] - 1}")
    return float(min(max(1.0 - p[true_class], 0.0), 1.0))


def gradient_norms(p_rows: np.ndarray, true_classes: np.ndarray) -> np.ndarray:
    """Row-wise gradient_norm, clipped into [0, 1]."""
    p_rows = np.asarray(p_rows, dtype=np.float64)
    true_classes = np.asarray(true_classes, dtype=np.int64)
    if p_rows.ndim != 2 or true_classes.shape != (p_rows.shape[0],):
        raise ShapeError(f"probabilities {p_rows.shape} and classes {true_classes.shape} do not align")
    if true_classes.size and (true_classes.min() < 0 or true_classes.max() >= p_rows.shape[1]):
        raise ValueError(f"true class outside 0..{p_rows.shape[1] - 1}")
    picked = p_rows[np.arange(len(true_classes)), true_classes]
    return np.clip(1.0 - picked, 0.0, 1.0)


def bin_index(g: float, m: int) -> int:
    """floor(g m), with g = 1 in the last bin."""
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"gradient norm {g} outside [0, 1]")
    return min(int(np.floor(g * m)), m - 1)


def bin_indices(g: np.ndarray, m: int) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.size and (g.min() < 0.0 or g.max() > 1.0):
        raise ValueError("gradient norms outside [0, 1]")
    return np.minimum(np.floor(g * m).astype(np.int64), m - 1)


def exact_density(g: float, all_g: Sequence[float], epsilon: float) -> float:
    """
    Samples within [g - ε/2, g + ε/2) divided by the part of that window
    inside [0, 1].
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    lo, hi = g - epsilon / 2.0, g + epsilon / 2.0
    all_g = np.asarray(all_g, dtype=np.float64)
    count = int(np.count_nonzero((all_g >= lo) & (all_g < hi)))
    valid = min(hi, 1.0) - max(lo, 0.0)
    return count / valid


def update_and_weights(
    p_batch: np.ndarray,
    true_classes: np.ndarray,
    hist: GradientHistogram,
    ema: bool = True,
) -> np.ndarray:
    """
    Update the histogram with one batch and return β per label.

    β_i = N / ρ̂(g_i) where ρ̂ is m·A of the label's region with EMA, or
    m·U without. A region whose A is still 0 while it holds labels (cold
    start) uses U for this step.
    """
    g = gradient_norms(p_batch, true_classes)
    if g.size == 0:
        raise ValueError("cannot weight an empty batch")
    ids = bin_indices(g, hist.bins)
    counts = hist.record(ids).astype(np.float64)
    n = float(len(ids))

    if ema:
        smoothed = hist.smooth()
        density = smoothed[ids]
        cold = density <= 0
        if np.any(cold):
            hist.cold_start_fallbacks += int(cold.sum())
            logger.debug(f"GHM cold start: {int(cold.sum())} labels fall back to batch counts")
            density = np.where(cold, counts[ids], density)
    else:
        density = counts[ids]
    return n / (hist.bins * density)


def ghm_cross_entropy(
    logits: DiffTensor,
    true_classes: np.ndarray,
    hist: Optional[GradientHistogram] = None,
    ema: bool = True,
    enabled: bool = True,
    weights: Optional[np.ndarray] = None,
) -> Tuple[DiffTensor, np.ndarray]:
    """
    -(1/n) Σ β_i log p_i[t_i] over the rows of `logits`.

    β comes from the histogram (computed on detached probabilities, so it
    is a constant for backpropagation), from `weights` when given, or is 1
    when GHM is disabled. A disabled loss still counts labels into the
    histogram for statistics. Returns the loss and the weights used.
    """
    true_classes = np.asarray(true_classes, dtype=np.int64)
    n = logits.shape[0]
    if true_classes.shape != (n,):
        raise ShapeError(f"{n} logit rows but {true_classes.shape} targets")
    log_probs = ops.log_softmax(logits, axis=-1)

    if weights is None:
        weights = np.ones(n, dtype=np.float64)
        if hist is not None and n:
            p = np.exp(np.asarray(log_probs.values, dtype=np.float64))
            if enabled:
                weights = update_and_weights(p, true_classes, hist, ema)
            else:
                hist.record(bin_indices(gradient_norms(p, true_classes), hist.bins))
                if ema:
                    hist.smooth()
    return ops.nll_loss(log_probs, true_classes, weights=weights, normalizer=max(n, 1)), weights
