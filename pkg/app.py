#!/usr/bin/env python3
"""
grace-tagger - cascaded aspect term and polarity tagging

Trains and evaluates a two-branch tagger: an encoder extracts aspect terms
(B/I/O) and a decoder, queried with those term labels, tags polarities.
Training uses a gradient-harmonized loss and virtual adversarial training.

Usage:
    python app.py synth --out corpus.txt [--n N] [--seed S] [--imbalance R] [--max-tokens T]
    python app.py train --train corpus.txt --out-dir run/ [--config FILE | --preset NAME]
    python app.py eval --checkpoint run/stage2.ckpt --data dev.txt
    python app.py predict --checkpoint run/stage2.ckpt --data dev.txt --out pred.txt
    python app.py stats --data corpus.txt
    python app.py inspect --checkpoint run/stage2.ckpt --data dev.txt
    python app.py init-config --preset desk --out train.cfg

Exit codes:
    0 success, 1 usage or configuration error, 2 data error, 3 numeric failure
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from textual.app import App

from data.corpus import TaggedSentence, load_corpus, save_corpus
from data.encoding import EncodedExample, encode_corpus
from data.synth import DEFAULT_IMBALANCE, DEFAULT_MAX_TOKENS, synth_generate
from data.vocab import Vocab
from decoding.spans import STRATEGIES, FIRST_TOKEN
from evaluation.export import export_gradient_stats
from evaluation.metrics import label_stats
from model.checkpoint import load_checkpoint
from model.grace import GraceModel
from screens import HelpScreen, SentenceListScreen, TokenDetailScreen
from training.inference import SentencePrediction, evaluate_examples, predict_examples
from training.presets import PRESETS, get_preset
from training.trainer import GRADIENT_STATS, STAGE1_CHECKPOINT, MetricLog, METRIC_LOG, train, train_stage2
from utils.config import TrainConfig
from utils.errors import EXIT_OK, CheckpointError, ConfigError, GraceError, exit_code_for
from utils.formatters import (
    epoch_table,
    format_metrics_report,
    format_prediction_dump,
    label_stats_table,
    metrics_table,
    pair_summary_table,
)
from utils.logging import get_logger, setup_logging
from utils.validators import validate_positive_int


logger = get_logger(__name__)

DEFAULT_PRESET = "desk"
CONFIG_FILE = "config.txt"
VOCAB_FILE = "vocab.txt"


class InspectorApp(App):
    """
    Read-only browser over one evaluation run: a sentence list with gold
    and predicted pairs, and a token table per sentence.
    """

    TITLE = "grace-tagger inspector"

    CSS = """
    Screen {
        layout: vertical;
    }

    #header {
        dock: top;
        height: 2;
        width: 100%;
    }

    #main-content {
        height: 1fr;
        padding: 0 2;
    }

    #status-bar {
        dock: bottom;
        height: 1;
        width: 100%;
    }

    #list-info {
        padding: 1 0;
        text-style: italic;
    }

    #sentence-list {
        height: 1fr;
        scrollbar-gutter: stable;
    }

    #sentence-list > ListItem {
        height: auto;
    }

    #pair-summary {
        padding: 1 0 0 0;
    }

    #token-table {
        height: 1fr;
    }

    #help-container {
        padding: 1;
    }
    """

    def __init__(
        self,
        predictions: Sequence[SentencePrediction],
        sentences: Sequence[TaggedSentence],
        source: str = "",
    ):
        self.predictions = list(predictions)
        self.sentences = list(sentences)
        self.source = source
        super().__init__()

    def on_mount(self) -> None:
        self.push_screen(SentenceListScreen(self.predictions, self.sentences, self.source))

    def push_screen(self, screen_name: str | object, params: Optional[Dict[str, Any]] = None):
        """Push a screen by name or instance."""
        if isinstance(screen_name, str):
            screen = self._create_screen(screen_name, params or {})
            if screen:
                return super().push_screen(screen)
        else:
            return super().push_screen(screen_name)

    def _create_screen(self, name: str, params: Dict[str, Any]) -> Optional[object]:
        if name == "tokens":
            return TokenDetailScreen(
                params.get("index", 0),
                prediction=params["prediction"],
                sentence=params["sentence"],
            )

        elif name == "help":
            return HelpScreen(context=params.get("context", "sentences"))

        return None


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- shared helpers ---

def load_model(path: Path) -> Tuple[GraceModel, Vocab]:
    checkpoint = load_checkpoint(path)
    if checkpoint.vocab is None:
        raise CheckpointError(f"checkpoint {path} carries no vocabulary")
    return GraceModel(checkpoint.config, checkpoint.params), checkpoint.vocab


def load_examples(path: Path, vocab: Vocab, max_len: int) -> List[EncodedExample]:
    examples, skipped = encode_corpus(load_corpus(path), vocab, max_len)
    if skipped:
        logger.warning(f"{skipped} sentences of {path} exceed max_len {max_len} and are left out")
    return examples


def resolve_config(args: argparse.Namespace) -> TrainConfig:
    if args.config:
        return TrainConfig.load(args.config).check()
    return get_preset(args.preset).check()


def write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


# --- commands ---

def cmd_synth(args: argparse.Namespace, console: Console) -> int:
    is_valid, error_msg = validate_positive_int(args.n, "--n")
    if not is_valid:
        raise ConfigError(error_msg, key="n")
    if args.imbalance < 0:
        raise ConfigError(f"--imbalance must not be negative, got: {args.imbalance}", key="imbalance")
    is_valid, error_msg = validate_positive_int(args.max_tokens, "--max-tokens")
    if not is_valid:
        raise ConfigError(error_msg, key="max_tokens")
    sentences = synth_generate(
        args.n, args.seed, imbalance=args.imbalance, conflict=args.conflict, max_tokens=args.max_tokens
    )
    save_corpus(sentences, args.out)
    console.print(f"Wrote {len(sentences)} sentences to {args.out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, console: Console) -> int:
    cfg = resolve_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_corpus = load_corpus(args.train)
    if args.stage == "2":
        stage1 = load_checkpoint(out_dir / STAGE1_CHECKPOINT)
        if stage1.vocab is None:
            raise CheckpointError(f"{out_dir / STAGE1_CHECKPOINT} carries no vocabulary")
        vocab = stage1.vocab
    else:
        vocab = Vocab.build(train_corpus, cfg.min_count)
        vocab.save(out_dir / VOCAB_FILE)
        cfg.save(out_dir / CONFIG_FILE)

    examples, _ = encode_corpus(train_corpus, vocab, cfg.model.max_len)
    dev = load_examples(args.dev, vocab, cfg.model.max_len) if args.dev else None
    logger.info(f"Training on {len(examples)} sentences, vocabulary {len(vocab)}")

    if args.stage == "2":
        result = train_stage2(examples, cfg, stage1, out_dir, dev, MetricLog(out_dir / METRIC_LOG))
        if result.snapshots:
            export_gradient_stats(result.snapshots, out_dir / GRADIENT_STATS, append=True)
    else:
        result = train(examples, cfg, vocab, out_dir, dev, stop_after_stage=1 if args.stage == "1" else None)

    console.print(epoch_table(result.records))
    for path in result.checkpoints:
        console.print(f"Checkpoint: {path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, console: Console) -> int:
    model, vocab = load_model(args.checkpoint)
    examples = load_examples(args.data, vocab, model.config.max_len)
    report = evaluate_examples(
        model, examples, args.batch, consistent=args.consistent_decode, strategy=args.strategy
    )
    text = format_metrics_report(report)
    if args.out:
        write_text(args.out, text)
    if args.table:
        console.print(metrics_table(report))
    else:
        sys.stdout.write(text)
    if report.neutral_fallbacks:
        logger.info(f"{report.neutral_fallbacks} predicted terms fell back to NEU")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, console: Console) -> int:
    model, vocab = load_model(args.checkpoint)
    examples = load_examples(args.data, vocab, model.config.max_len)
    predictions = predict_examples(
        model, examples, args.batch, consistent=args.consistent_decode, strategy=args.strategy
    )
    text = format_prediction_dump(predictions)
    if args.out:
        write_text(args.out, text)
        console.print(f"Wrote {len(predictions)} predictions to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, console: Console) -> int:
    corpus = load_corpus(args.data)
    console.print(label_stats_table(label_stats(corpus)))
    if args.pairs:
        console.print(pair_summary_table(corpus))
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, console: Console) -> int:
    model, vocab = load_model(args.checkpoint)
    examples = load_examples(args.data, vocab, model.config.max_len)
    predictions = predict_examples(
        model, examples, args.batch, consistent=args.consistent_decode, strategy=args.strategy
    )
    app = InspectorApp(predictions, [e.sentence for e in examples], source=Path(args.data).name)
    app.run()
    return EXIT_OK


def cmd_init_config(args: argparse.Namespace, console: Console) -> int:
    cfg = get_preset(args.preset)
    cfg.save(args.out)
    console.print(f"Wrote preset '{args.preset}' to {args.out}")
    return EXIT_OK


# --- argument parsing ---

def add_decode_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", type=Path, required=True, help="Model checkpoint file")
    parser.add_argument("--data", type=Path, required=True, help="Tagged corpus file")
    parser.add_argument(
        "--consistent-decode",
        action="store_true",
        help="Score each predicted term once from its span-pooled decoder states",
    )
    parser.add_argument(
        "--strategy",
        choices=STRATEGIES,
        default=FIRST_TOKEN,
        help="How a term's polarity is read from its tokens",
    )
    parser.add_argument("--batch", type=int, default=64, help="Sentences per inference batch")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="grace-tagger",
        description="Cascaded aspect term and polarity tagger",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress to the console")
    parser.add_argument("--debug-log", action="store_true", help="Write a debug log file")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = command("synth", "Generate a synthetic tagged corpus")
    p.add_argument("--out", type=Path, required=True, help="Corpus file to write")
    p.add_argument("--n", type=int, default=2000, help="Number of sentences")
    p.add_argument("--seed", type=int, default=13, help="Generator seed")
    p.add_argument("--imbalance", type=float, default=DEFAULT_IMBALANCE, help="Target O:term token ratio")
    p.add_argument("--conflict", action="store_true", help="Include conflicting-sentiment sentences")
    p.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS, help="Longest padded sentence in tokens")
    p.set_defaults(handler=cmd_synth)

    p = command("train", "Run the two-stage training schedule")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--config", type=Path, help="key=value training config (every key required)")
    source.add_argument("--preset", choices=list(PRESETS), default=DEFAULT_PRESET, help="Named configuration")
    p.add_argument("--train", type=Path, required=True, help="Training corpus")
    p.add_argument("--dev", type=Path, help="Development corpus for per-epoch F1")
    p.add_argument("--out-dir", type=Path, required=True, help="Directory for checkpoints and logs")
    p.add_argument(
        "--stage",
        choices=("1", "2", "all"),
        default="all",
        help="1 stops after stage 1; 2 resumes from the stage-1 checkpoint in --out-dir",
    )
    p.set_defaults(handler=cmd_train)

    p = command("eval", "Print exact-match metrics of a checkpoint on a corpus")
    add_decode_args(p)
    p.add_argument("--out", type=Path, help="Also write the report to this file")
    p.add_argument("--table", action="store_true", help="Print a table instead of key=value lines")
    p.set_defaults(handler=cmd_eval)

    p = command("predict", "Write predicted pairs, one sentence per line")
    add_decode_args(p)
    p.add_argument("--out", type=Path, help="Dump file (stdout if omitted)")
    p.set_defaults(handler=cmd_predict)

    p = command("stats", "Print label statistics of a corpus")
    p.add_argument("--data", type=Path, required=True, help="Tagged corpus file")
    p.add_argument("--pairs", action="store_true", help="Also count aspect terms per polarity")
    p.set_defaults(handler=cmd_stats)

    p = command("inspect", "Browse predictions against gold interactively")
    add_decode_args(p)
    p.set_defaults(handler=cmd_inspect)

    p = command("init-config", "Write a complete key=value config for a preset")
    p.add_argument("--preset", choices=list(PRESETS), default=DEFAULT_PRESET, help="Named configuration")
    p.add_argument("--out", type=Path, required=True, help="Config file to write")
    p.set_defaults(handler=cmd_init_config)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(enabled=True if args.debug_log else None, console=args.verbose)
    console = Console()

    try:
        return args.handler(args, console)
    except (GraceError, OSError) as e:
        code = exit_code_for(e)
        logger.debug(f"{args.command} failed: {e!r}")
        Console(stderr=True).print(f"error: {e}", markup=False, highlight=False)
        return code


if __name__ == "__main__":
    sys.exit(main())
