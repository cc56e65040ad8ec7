"""The cascaded tagging network, its parameters and checkpoint files."""

from .config import EncoderConfig
from .params import ModelParams, init_params, param_shapes
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .grace import BranchOutput, ForwardOutput, GraceModel, init_asc_from_ate, predicted_term_labels

__all__ = [
    "EncoderConfig",
    "ModelParams",
    "init_params",
    "param_shapes",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "BranchOutput",
    "ForwardOutput",
    "GraceModel",
    "init_asc_from_ate",
    "predicted_term_labels",
]
