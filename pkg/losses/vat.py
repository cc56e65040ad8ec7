"""
Virtual adversarial training on token embeddings.

One power-iteration step: probe the KL between clean and slightly
perturbed predictions with frozen parameters, take its gradient with
respect to the embeddings, and scale it to radius eps. The consistency
loss then compares clean predictions (held constant) with predictions on
the adversarially shifted embeddings.

Dropout is off in every forward pass here.
"""

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from model.grace import GraceModel
from numcore import ops
from numcore.tensor import DiffTensor, backward, constant, no_grad, parameter
from utils.errors import ShapeError
from utils.logging import get_logger
from utils.validators import validate_choice, validate_positive_float


logger = get_logger(__name__)

APPLY_ATE = "ate"
APPLY_ASC = "asc"
APPLY_BOTH = "both"
APPLY_CHOICES = (APPLY_ATE, APPLY_ASC, APPLY_BOTH)

# The probe magnitude sits below float32 resolution of the KL
PROBE_DTYPE = np.float64

# Per-sentence gradient norms at or below this count as vanished
NORM_FLOOR = 1e-30


@dataclass
class VatConfig:
    """Probe magnitude, perturbation radius and the branches compared."""

    xi: float = 1e-6
    eps: float = 2.0
    apply_to: str = APPLY_BOTH

    def validate(self) -> List[str]:
        errors = []

        is_valid, error_msg = validate_positive_float(self.xi, "vat.xi")
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_positive_float(self.eps, "vat.eps")
        if not is_valid:
            errors.append(error_msg)

        is_valid, error_msg = validate_choice(self.apply_to, "vat.apply_to", APPLY_CHOICES)
        if not is_valid:
            errors.append(error_msg)

        return errors


@dataclass
class VatCounters:
    """Sentences perturbed, and those whose probe gradient vanished."""
    perturbations: int = 0
    zero_gradients: int = 0


def branch_logits(
    model,
    embeddings: DiffTensor,
    attention_mask: Optional[np.ndarray],
    q_labels: Optional[np.ndarray],
    apply_to: str,
    perturbation: Optional[DiffTensor] = None,
) -> List[DiffTensor]:
    """Logits of the selected branches for the given token embeddings."""
    layers = model.encode(embeddings=embeddings, perturbation=perturbation, attention_mask=attention_mask)
    logits = []
    if apply_to in (APPLY_ATE, APPLY_BOTH):
        logits.append(model.ate_branch(layers).logits)
    if apply_to in (APPLY_ASC, APPLY_BOTH):
        if q_labels is None:
            raise ValueError("the ASC branch needs term labels for its queries")
        logits.append(model.asc_branch(layers, q_labels, attention_mask).logits)
    return logits


def _rows(x: Union[DiffTensor, np.ndarray], positions: np.ndarray):
    """(batch, positions, C) → (selected positions, C)."""
    if isinstance(x, DiffTensor):
        flat = ops.reshape(x, (-1, x.shape[-1]))
        return ops.take(flat, positions)
    return np.asarray(x).reshape(-1, x.shape[-1])[positions]


def _loss_positions(loss_mask: Optional[np.ndarray], shape) -> np.ndarray:
    if loss_mask is None:
        return np.arange(int(np.prod(shape[:2])))
    return np.flatnonzero(np.asarray(loss_mask).reshape(-1) > 0)


def consistency_kl(
    clean_logits: List[np.ndarray],
    logits: List[DiffTensor],
    loss_mask: Optional[np.ndarray] = None,
) -> DiffTensor:
    """
    Mean over branches of the mean per-position KL(clean ‖ softmax(logits))
    over loss positions; the clean side is a constant.
    """
    positions = _loss_positions(loss_mask, logits[0].shape)
    terms = []
    for clean, live in zip(clean_logits, logits):
        log_p = ops.log_softmax_array(_rows(clean, positions))
        terms.append(ops.kl_with_logits(np.exp(log_p), _rows(live, positions), log_p=log_p))
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total * (1.0 / len(terms)) if len(terms) > 1 else total


def adversarial_perturbation(
    embeddings: Union[DiffTensor, np.ndarray],
    model,
    cfg: VatConfig,
    seed: Union[int, np.random.Generator, None],
    attention_mask: Optional[np.ndarray] = None,
    loss_mask: Optional[np.ndarray] = None,
    q_labels: Optional[np.ndarray] = None,
    counters: Optional[VatCounters] = None,
) -> np.ndarray:
    """
    r = eps · ∇KL / ‖∇KL‖₂ for the probe E + xi·d, d ~ N(0, I).

    The norm is taken per sentence over its real positions, so every
    sentence gets a perturbation of length eps; padded rows stay zero. The
    model is evaluated on a 64-bit constant copy of its parameters, so no
    parameter gradient is touched. A sentence whose gradient is zero or
    non-finite gets r = 0 and is counted.
    """
    E = np.asarray(embeddings.values if isinstance(embeddings, DiffTensor) else embeddings, dtype=PROBE_DTYPE)
    frozen = GraceModel(model.config, model.params.frozen(PROBE_DTYPE))
    rng = np.random.default_rng(seed)

    with no_grad():
        clean = [l.values for l in branch_logits(frozen, constant(E), attention_mask, q_labels, cfg.apply_to)]

    d = rng.standard_normal(E.shape)
    probe = parameter(E + cfg.xi * d)
    kl = consistency_kl(clean, branch_logits(frozen, probe, attention_mask, q_labels, cfg.apply_to), loss_mask)
    if kl.node is not None:
        backward(kl)
    grad = probe.grad
    if attention_mask is not None:
        grad = grad * (np.asarray(attention_mask) > 0)[..., None]

    norms = np.sqrt(np.sum(grad * grad, axis=tuple(range(1, grad.ndim)), keepdims=True))
    usable = np.isfinite(norms) & (norms > NORM_FLOOR)
    r = np.where(usable, cfg.eps * grad / np.where(usable, norms, 1.0), 0.0)

    vanished = int(np.size(usable) - np.count_nonzero(usable))
    if counters is not None:
        counters.perturbations += int(np.size(usable))
        counters.zero_gradients += vanished
    if vanished:
        logger.debug(f"VAT probe gradient vanished for {vanished} of {np.size(usable)} sentences")
    return r


def vat_loss(
    embeddings: DiffTensor,
    r: np.ndarray,
    model,
    cfg: VatConfig,
    attention_mask: Optional[np.ndarray] = None,
    loss_mask: Optional[np.ndarray] = None,
    q_labels: Optional[np.ndarray] = None,
) -> DiffTensor:
    """
    Mean KL between clean predictions (constant) and predictions on E + r,
    with gradients flowing into the trainable parameters.
    """
    r = np.asarray(r)
    if r.shape != embeddings.shape:
        raise ShapeError(f"perturbation shape {r.shape} does not match embeddings {embeddings.shape}")
    with no_grad():
        clean = [l.values for l in branch_logits(model, embeddings.detach(), attention_mask, q_labels, cfg.apply_to)]
    perturbation = constant(r.astype(embeddings.dtype))
    adversarial = branch_logits(model, embeddings, attention_mask, q_labels, cfg.apply_to, perturbation)
    return consistency_kl(clean, adversarial, loss_mask)
