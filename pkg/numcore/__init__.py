"""Reverse-mode differentiation engine and optimizer for grace-tagger."""

from .tensor import (
    DiffTensor,
    Function,
    Tape,
    TapeRecord,
    backward,
    constant,
    grad_enabled,
    no_grad,
    parameter,
)
from .optim import AdamState, AdamWarmup, ParamGroup, adam_step, clip_grad_norm, warmup_factor

__all__ = [
    "DiffTensor",
    "Function",
    "Tape",
    "TapeRecord",
    "backward",
    "constant",
    "grad_enabled",
    "no_grad",
    "parameter",
    "AdamState",
    "AdamWarmup",
    "ParamGroup",
    "adam_step",
    "clip_grad_norm",
    "warmup_factor",
]
