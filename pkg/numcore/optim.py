"""
Adam with linear warmup, per-group learning rates and global-norm clipping.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np

from numcore.tensor import DiffTensor
from utils.errors import NumericDomainError
from utils.logging import get_logger


logger = get_logger(__name__)

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8


def warmup_factor(step: int, warmup_steps: int) -> float:
    """min(1, step / warmup_steps); steps count from 1, no warmup means 1."""
    if warmup_steps <= 0:
        return 1.0
    return min(1.0, step / warmup_steps)


@dataclass
class AdamState:
    """Moment buffers and the shared step counter for one parameter group."""
    warmup_steps: int = 0
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def lr_factor(self) -> float:
        return warmup_factor(self.step, self.warmup_steps)


def adam_step(
    params: Mapping[str, DiffTensor],
    grads: Optional[Mapping[str, np.ndarray]],
    lr: float,
    state: AdamState,
    betas=(BETA1, BETA2),
    eps: float = ADAM_EPS,
) -> Mapping[str, DiffTensor]:
    """
    Apply one Adam update in place and return the parameters.

    Gradients default to each tensor's accumulated grad. A non-finite
    gradient aborts the step before any parameter or moment changes.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if grads is None:
        grads = {name: p.grad for name, p in params.items()}

    for name in params:
        if not np.all(np.isfinite(grads[name])):
            raise NumericDomainError(f"non-finite gradient for parameter '{name}' at step {state.step + 1}")

    state.step += 1
    beta1, beta2 = betas
    step_lr = lr * state.lr_factor
    bias1 = 1.0 - beta1 ** state.step
    bias2 = 1.0 - beta2 ** state.step

    for name, tensor in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(g)
            v = np.zeros_like(g)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        state.m[name], state.v[name] = m, v
        update = step_lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
        tensor.values = (tensor.values - update).astype(tensor.dtype)

    return params


def global_grad_norm(tensors: Iterable[DiffTensor]) -> float:
    total = 0.0
    for t in tensors:
        g = t.grad
        total += float(np.sum(np.asarray(g, dtype=np.float64) ** 2))
    return float(np.sqrt(total))


def clip_grad_norm(tensors: Iterable[DiffTensor], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most max_norm."""
    tensors = list(tensors)
    norm = global_grad_norm(tensors)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for t in tensors:
            if t.requires_grad:
                t.grad = t.grad * scale
    return norm


@dataclass
class ParamGroup:
    """Named parameters sharing a learning rate."""
    name: str
    params: Dict[str, DiffTensor]
    lr: float


class AdamWarmup:
    """
    Adam over several parameter groups with one warmup schedule.

    Parameters outside every group are never touched.
    """

    def __init__(
        self,
        groups: List[ParamGroup],
        warmup_steps: int = 0,
        clip_norm: Optional[float] = None,
    ):
        self.groups = groups
        self.clip_norm = clip_norm
        self.states = {g.name: AdamState(warmup_steps=warmup_steps) for g in groups}

    @property
    def step_count(self) -> int:
        return next(iter(self.states.values())).step if self.states else 0

    def all_params(self) -> List[DiffTensor]:
        return [p for g in self.groups for p in g.params.values()]

    def step(self) -> float:
        """Clip, update every group, and return the pre-clip gradient norm."""
        params = self.all_params()
        if self.clip_norm:
            norm = clip_grad_norm(params, self.clip_norm)
        else:
            norm = global_grad_norm(params)
        if not np.isfinite(norm):
            raise NumericDomainError("non-finite gradient norm; step aborted")
        for group in self.groups:
            adam_step(group.params, None, group.lr, self.states[group.name])
        return norm

    def zero_grad(self) -> None:
        for p in self.all_params():
            p.zero_grad()
