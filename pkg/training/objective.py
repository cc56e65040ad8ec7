"""
The training objective: J = L_e + L_c + L_VAT.

L_e and L_c are (gradient-harmonized) cross-entropies over real-token
positions only; [CLS], [SEP] and padding never enter a loss or a
histogram.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np

from data.batching import Batch
from decoding.consistent import batch_boundaries, consistent_polarity
from losses.ghm import GradientHistogram, ghm_cross_entropy
from losses.vat import APPLY_ATE, VatConfig, VatCounters, adversarial_perturbation, vat_loss
from model.grace import GraceModel
from model.layers import linear
from numcore import ops
from numcore.tensor import DiffTensor
from utils.errors import NumericDomainError
from utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class LossBreakdown:
    """
    The scalar objective and its parts.

    `head_fit` is the fit of whichever polarity head J does not use; its
    gradient reaches that head's own parameters only, so J and every
    other gradient are unchanged by it.
    """
    total: DiffTensor
    ate: float
    asc: float
    vat: float
    labels_e: int
    labels_c: int
    head_fit: Optional[DiffTensor] = None

    def components(self) -> Dict[str, float]:
        return {"L_e": self.ate, "L_c": self.asc, "L_VAT": self.vat}

    @property
    def root(self) -> DiffTensor:
        """What the trainer differentiates."""
        if self.head_fit is None:
            return self.total
        return self.total + self.head_fit


@dataclass
class ObjectiveSettings:
    """Switches that shape loss_total for one training phase."""
    use_ghm: bool = True
    ghm_ema: bool = True
    use_vat: bool = False
    include_asc: bool = True
    consistent_polarity: bool = False


def loss_positions(mask: np.ndarray) -> np.ndarray:
    """Flat indices of positions that count towards the losses."""
    return np.flatnonzero(np.asarray(mask).reshape(-1) > 0)


def masked_rows(x: DiffTensor, positions: np.ndarray) -> DiffTensor:
    """(batch, positions, C) → (len(positions), C), differentiably."""
    return ops.take(ops.reshape(x, (-1, x.shape[-1])), positions)


def polarity_logits(model: GraceModel, hidden: DiffTensor, term_ids: np.ndarray, consistent: bool) -> DiffTensor:
    """ASC scores: per-token head, or span-pooled scores with consistent polarity."""
    if consistent:
        return consistent_polarity(hidden, batch_boundaries(term_ids), model.params)
    return linear(hidden, model.params, "asc_head")


def consistent_head_fit(
    model: GraceModel,
    hidden: DiffTensor,
    term_ids: np.ndarray,
    positions: np.ndarray,
    gold_polarities: np.ndarray,
) -> DiffTensor:
    """
    Plain cross-entropy of the span-pooled scores, trainable through
    polarity_head only: decoder states and the ASC head enter as constants.
    """
    params = model.params.restricted("polarity_head")
    scores = consistent_polarity(hidden.detach(), batch_boundaries(term_ids), params)
    fit, _ = ghm_cross_entropy(masked_rows(scores, positions), gold_polarities, enabled=False)
    return fit


def loss_total(
    batch: Batch,
    model: GraceModel,
    hist_e: Optional[GradientHistogram],
    hist_c: Optional[GradientHistogram],
    vat_cfg: VatConfig,
    settings: Optional[ObjectiveSettings] = None,
    train: bool = True,
    rng: Optional[np.random.Generator] = None,
    vat_counters: Optional[VatCounters] = None,
) -> LossBreakdown:
    """
    Compute J for one batch with gold term labels as ASC queries.

    With include_asc off (stage 1) the ASC branch is not evaluated at all.
    VAT compares the ATE distribution in stage 1 and vat_cfg.apply_to
    otherwise.

    Raises:
        NumericDomainError: if any component is not finite.
    """
    settings = settings or ObjectiveSettings()
    positions = loss_positions(batch.loss_mask)
    embeddings = model.embed(batch.token_ids)
    layers = model.encode(
        embeddings=embeddings,
        attention_mask=batch.attention_mask,
        train=train,
        rng=rng,
    )

    ate = model.ate_branch(layers)
    gold_terms = batch.term_ids.reshape(-1)[positions]
    loss_e, _ = ghm_cross_entropy(
        masked_rows(ate.logits, positions), gold_terms, hist_e,
        ema=settings.ghm_ema, enabled=settings.use_ghm,
    )
    total = loss_e
    loss_c_value = 0.0
    head_fit = None

    if settings.include_asc:
        hidden, _ = model.decode_labels(
            model.asc_memory(layers), batch.term_ids, batch.attention_mask, train, rng
        )
        scores = polarity_logits(model, hidden, batch.term_ids, settings.consistent_polarity)
        gold_polarities = batch.polarity_ids.reshape(-1)[positions]
        loss_c, _ = ghm_cross_entropy(
            masked_rows(scores, positions), gold_polarities, hist_c,
            ema=settings.ghm_ema, enabled=settings.use_ghm,
        )
        total = total + loss_c
        loss_c_value = loss_c.item()
        if train and not settings.consistent_polarity:
            head_fit = consistent_head_fit(model, hidden, batch.term_ids, positions, gold_polarities)

    loss_vat_value = 0.0
    if settings.use_vat:
        cfg = vat_cfg if settings.include_asc else replace(vat_cfg, apply_to=APPLY_ATE)
        r = adversarial_perturbation(
            embeddings, model, cfg, rng if rng is not None else np.random.default_rng(0),
            attention_mask=batch.attention_mask,
            loss_mask=batch.loss_mask,
            q_labels=batch.term_ids,
            counters=vat_counters,
        )
        loss_vat = vat_loss(
            embeddings, r, model, cfg,
            attention_mask=batch.attention_mask,
            loss_mask=batch.loss_mask,
            q_labels=batch.term_ids,
        )
        total = total + loss_vat
        loss_vat_value = loss_vat.item()

    breakdown = LossBreakdown(
        total=total,
        ate=loss_e.item(),
        asc=loss_c_value,
        vat=loss_vat_value,
        labels_e=len(positions),
        labels_c=len(positions) if settings.include_asc else 0,
        head_fit=head_fit,
    )
    if not all(math.isfinite(v) for v in breakdown.components().values()):
        raise NumericDomainError("non-finite training loss", breakdown.components())
    return breakdown
