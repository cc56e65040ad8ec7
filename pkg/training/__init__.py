"""The training objective, the two-stage schedule, presets and cascaded inference."""

from .objective import LossBreakdown, ObjectiveSettings, loss_total
from .inference import SentencePrediction, evaluate_examples, predict_examples
from .presets import PRESETS, get_preset
from .trainer import (
    EpochRecord,
    MetricLog,
    StageResult,
    run_phase,
    train,
    train_stage1,
    train_stage2,
)

__all__ = [
    "LossBreakdown",
    "ObjectiveSettings",
    "loss_total",
    "SentencePrediction",
    "evaluate_examples",
    "predict_examples",
    "PRESETS",
    "get_preset",
    "EpochRecord",
    "MetricLog",
    "StageResult",
    "run_phase",
    "train",
    "train_stage1",
    "train_stage2",
]
