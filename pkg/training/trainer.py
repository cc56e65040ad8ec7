"""
Two-stage training.

Stage 1 trains the encoder and the ATE head: first on L_e alone, then on
L_e + L_VAT (ATE distribution). Stage 2 initializes the ASC decoder from
the top encoder layers and trains everything on the full objective with a
larger learning rate for the ASC side.

Each phase starts a fresh optimizer and fresh histograms, and every random
draw comes from default_rng([seed, phase, epoch, batch]), so a phase
resumed from the previous phase's checkpoint replays bit-exactly.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from data.batching import make_batches
from data.encoding import EncodedExample
from data.vocab import Vocab
from evaluation.export import export_gradient_stats
from losses.ghm import GradientHistogram, HistogramSnapshot
from losses.vat import VatCounters
from model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from model.config import EncoderConfig
from model.grace import GraceModel, init_asc_from_ate
from model.params import ModelParams, init_params
from numcore.optim import AdamWarmup, ParamGroup
from numcore.tensor import backward
from training.inference import evaluate_examples
from training.objective import ObjectiveSettings, loss_total
from utils.config import TrainConfig
from utils.errors import ConfigError
from utils.logging import get_logger


logger = get_logger(__name__)

PHASE_STAGE1 = 1
PHASE_STAGE1_VAT = 2
PHASE_STAGE2 = 3

STAGE1_PHASE1_CHECKPOINT = "stage1_phase1.ckpt"
STAGE1_CHECKPOINT = "stage1.ckpt"
STAGE2_CHECKPOINT = "stage2.ckpt"
METRIC_LOG = "metrics.jsonl"
GRADIENT_STATS = "gradient_stats.csv"

ATE_PREFIXES = ("embed", "encoder", "ate_head")
ASC_PREFIXES = ("asc", "asc_head", "polarity_head")


@dataclass
class EpochRecord:
    """One line of the metric log."""
    stage: int
    phase: int
    epoch: int
    L_e: float
    L_c: float
    L_VAT: float
    F1_dev: Optional[float]
    labels_e: int
    labels_c: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


class MetricLog:
    """Line-delimited JSON epoch records, kept in memory and optionally appended to a file."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path else None
        self.records: List[EpochRecord] = []
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)
        if self.path:
            with open(self.path, "a", encoding="utf-8", newline="\n") as f:
                f.write(record.to_json() + "\n")


@dataclass
class PhaseResult:
    records: List[EpochRecord] = field(default_factory=list)
    snapshots: List[HistogramSnapshot] = field(default_factory=list)
    vat_counters: VatCounters = field(default_factory=VatCounters)
    steps: int = 0


@dataclass
class StageResult:
    params: ModelParams
    config: EncoderConfig
    checkpoints: List[Path] = field(default_factory=list)
    records: List[EpochRecord] = field(default_factory=list)
    snapshots: List[HistogramSnapshot] = field(default_factory=list)


def model_config(cfg: TrainConfig, vocab: Vocab) -> EncoderConfig:
    """The configured network sized for a vocabulary."""
    config = replace(cfg.model, vocab_size=len(vocab))
    errors = config.validate()
    if errors:
        raise ConfigError("invalid model configuration: " + "; ".join(errors))
    return config


def warmup_steps(cfg: TrainConfig, n_examples: int, epochs: int) -> int:
    steps = epochs * math.ceil(n_examples / cfg.batch)
    return math.ceil(cfg.warmup * steps)


def run_phase(
    model: GraceModel,
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    groups: List[ParamGroup],
    epochs: int,
    stage: int,
    phase: int,
    settings: ObjectiveSettings,
    dev: Optional[Sequence[EncodedExample]] = None,
    log: Optional[MetricLog] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> PhaseResult:
    """Optimize one phase in place and return its epoch records and histogram snapshots."""
    result = PhaseResult()
    if epochs <= 0 or not examples:
        return result

    optimizer = AdamWarmup(groups, warmup_steps(cfg, len(examples), epochs), clip_norm=cfg.grad_clip)
    hist_e = GradientHistogram(cfg.ghm_bins, cfg.ghm_momentum)
    hist_c = GradientHistogram(cfg.ghm_bins, cfg.ghm_momentum)

    for epoch in range(1, epochs + 1):
        hist_e.reset_epoch()
        hist_c.reset_epoch()
        sums = {"L_e": 0.0, "L_c": 0.0, "L_VAT": 0.0}
        batches = 0
        labels_e = labels_c = 0

        for index, batch in enumerate(make_batches(examples, cfg.batch, seed=cfg.seed, epoch=epoch, phase=phase)):
            rng = np.random.default_rng([cfg.seed, phase, epoch, index])
            optimizer.zero_grad()
            breakdown = loss_total(
                batch, model, hist_e, hist_c, cfg.vat, settings,
                train=True, rng=rng, vat_counters=result.vat_counters,
            )
            backward(breakdown.root)
            optimizer.step()
            for key, value in breakdown.components().items():
                sums[key] += value
            labels_e += breakdown.labels_e
            labels_c += breakdown.labels_c
            batches += 1
            result.steps += 1

        f1_dev = None
        if dev:
            report = evaluate_examples(
                model, dev, cfg.eval_batch,
                consistent=cfg.consistent_polarity and settings.include_asc,
                strategy=cfg.polarity_strategy,
            )
            f1_dev = report.pairs.f1 if settings.include_asc else report.terms.f1

        record = EpochRecord(
            stage=stage,
            phase=phase,
            epoch=epoch,
            L_e=sums["L_e"] / batches,
            L_c=sums["L_c"] / batches,
            L_VAT=sums["L_VAT"] / batches,
            F1_dev=f1_dev,
            labels_e=labels_e,
            labels_c=labels_c,
        )
        result.records.append(record)
        result.snapshots.append(hist_e.snapshot(epoch, "ate"))
        if settings.include_asc:
            result.snapshots.append(hist_c.snapshot(epoch, "asc"))
        if log is not None:
            log.append(record)
        if on_epoch is not None:
            on_epoch(record)
        logger.info(
            f"stage {stage} phase {phase} epoch {epoch}: "
            f"L_e={record.L_e:.4f} L_c={record.L_c:.4f} L_VAT={record.L_VAT:.4f} F1_dev={f1_dev}"
        )

    if result.vat_counters.zero_gradients:
        logger.warning(
            f"VAT probe gradient vanished in {result.vat_counters.zero_gradients} of "
            f"{result.vat_counters.perturbations} perturbed sentences"
        )
    return result


def _meta(cfg: TrainConfig, stage: int, phase: int) -> dict:
    return {"seed": cfg.seed, "stage": stage, "phase": phase}


def stage1_settings(cfg: TrainConfig, with_vat: bool) -> ObjectiveSettings:
    return ObjectiveSettings(
        use_ghm=cfg.use_ghm,
        ghm_ema=cfg.ghm_ema,
        use_vat=with_vat and cfg.use_vat,
        include_asc=False,
    )


def stage1_groups(params: ModelParams, lr: float) -> List[ParamGroup]:
    return [ParamGroup("ate", params.select(*ATE_PREFIXES), lr)]


def train_stage1_ate(
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    vocab: Vocab,
    out_dir: Optional[Path] = None,
    dev: Optional[Sequence[EncodedExample]] = None,
    params: Optional[ModelParams] = None,
    log: Optional[MetricLog] = None,
) -> StageResult:
    """Phase 1: L_e only at lr_stage1."""
    config = model_config(cfg, vocab)
    params = params if params is not None else init_params(config, cfg.seed)
    model = GraceModel(config, params)
    phase = run_phase(
        model, examples, cfg, stage1_groups(params, cfg.lr_stage1),
        cfg.stage1_epochs, 1, PHASE_STAGE1, stage1_settings(cfg, with_vat=False), dev, log,
    )
    result = StageResult(params, config, [], phase.records, phase.snapshots)
    if out_dir is not None:
        result.checkpoints.append(save_checkpoint(
            Path(out_dir) / STAGE1_PHASE1_CHECKPOINT, config, params, vocab, _meta(cfg, 1, PHASE_STAGE1)
        ))
    return result


def train_stage1_vat(
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    vocab: Vocab,
    params: ModelParams,
    out_dir: Optional[Path] = None,
    dev: Optional[Sequence[EncodedExample]] = None,
    log: Optional[MetricLog] = None,
) -> StageResult:
    """Phase 2: L_e + L_VAT on the ATE distribution at lr_stage1_vat."""
    config = model_config(cfg, vocab)
    model = GraceModel(config, params)
    phase = run_phase(
        model, examples, cfg, stage1_groups(params, cfg.lr_stage1_vat),
        cfg.stage1_vat_epochs, 1, PHASE_STAGE1_VAT, stage1_settings(cfg, with_vat=True), dev, log,
    )
    result = StageResult(params, config, [], phase.records, phase.snapshots)
    if out_dir is not None:
        result.checkpoints.append(save_checkpoint(
            Path(out_dir) / STAGE1_CHECKPOINT, config, params, vocab, _meta(cfg, 1, PHASE_STAGE1_VAT)
        ))
    return result


def train_stage1(
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    vocab: Vocab,
    out_dir: Optional[Path] = None,
    dev: Optional[Sequence[EncodedExample]] = None,
    params: Optional[ModelParams] = None,
    log: Optional[MetricLog] = None,
) -> StageResult:
    """Both stage-1 phases; checkpoints are written after each."""
    first = train_stage1_ate(examples, cfg, vocab, out_dir, dev, params, log)
    second = train_stage1_vat(examples, cfg, vocab, first.params, out_dir, dev, log)
    return StageResult(
        second.params,
        second.config,
        first.checkpoints + second.checkpoints,
        first.records + second.records,
        first.snapshots + second.snapshots,
    )


def stage2_groups(params: ModelParams, cfg: TrainConfig) -> List[ParamGroup]:
    groups = [ParamGroup("ate", params.select(*ATE_PREFIXES), cfg.lr_stage2_ate)]
    asc = params.select(*ASC_PREFIXES)
    if asc:
        groups.insert(0, ParamGroup("asc", asc, cfg.lr_stage2_asc))
    return groups


def train_stage2(
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    stage1: Checkpoint,
    out_dir: Optional[Path] = None,
    dev: Optional[Sequence[EncodedExample]] = None,
    log: Optional[MetricLog] = None,
) -> StageResult:
    """Full objective with gold-label queries and per-group learning rates."""
    if stage1.vocab is None:
        raise ConfigError("stage-1 checkpoint carries no vocabulary")
    config = model_config(cfg, stage1.vocab)
    if asdict(config) != asdict(stage1.config):
        raise ConfigError("model settings differ from the stage-1 checkpoint")
    params = init_asc_from_ate(stage1.params, config, cfg.seed)
    model = GraceModel(config, params)
    settings = ObjectiveSettings(
        use_ghm=cfg.use_ghm,
        ghm_ema=cfg.ghm_ema,
        use_vat=cfg.use_vat,
        include_asc=True,
        consistent_polarity=cfg.consistent_polarity,
    )
    phase = run_phase(
        model, examples, cfg, stage2_groups(params, cfg),
        cfg.stage2_epochs, 2, PHASE_STAGE2, settings, dev, log,
    )
    result = StageResult(params, config, [], phase.records, phase.snapshots)
    if out_dir is not None:
        result.checkpoints.append(save_checkpoint(
            Path(out_dir) / STAGE2_CHECKPOINT, config, params, stage1.vocab, _meta(cfg, 2, PHASE_STAGE2)
        ))
    return result


def train(
    examples: Sequence[EncodedExample],
    cfg: TrainConfig,
    vocab: Vocab,
    out_dir: Path,
    dev: Optional[Sequence[EncodedExample]] = None,
    stop_after_stage: Optional[int] = None,
) -> StageResult:
    """
    Stage 1, then (unless ate_only or stop_after_stage=1) stage 2.

    Writes checkpoints, the metric log and the gradient statistics into
    out_dir.
    """
    cfg.check()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / METRIC_LOG
    if log_path.exists():
        log_path.unlink()
    log = MetricLog(log_path)

    result = train_stage1(examples, cfg, vocab, out_dir, dev, log=log)
    if not (cfg.ate_only or stop_after_stage == 1):
        stage1 = load_checkpoint(out_dir / STAGE1_CHECKPOINT)
        second = train_stage2(examples, cfg, stage1, out_dir, dev, log)
        result = StageResult(
            second.params,
            second.config,
            result.checkpoints + second.checkpoints,
            result.records + second.records,
            result.snapshots + second.snapshots,
        )

    if result.snapshots:
        export_gradient_stats(result.snapshots, out_dir / GRADIENT_STATS)
    return result
