"""
Formatting utilities for reports, statistics and predictions.
"""

from collections import Counter
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

from rich.table import Table

from data.schema import SENTIMENT_TAGS

if TYPE_CHECKING:
    from data.corpus import TaggedSentence
    from evaluation.metrics import PRF, LabelStats, MetricsReport
    from training.inference import SentencePrediction

PRF_KEYS = ("precision", "recall", "f1", "n_gold", "n_pred", "n_correct")
MISSING = "-"


def _prf_values(prf: "PRF") -> List[Tuple[str, str]]:
    return [
        ("precision", f"{prf.precision:.6f}"),
        ("recall", f"{prf.recall:.6f}"),
        ("f1", f"{prf.f1:.6f}"),
        ("n_gold", str(prf.n_gold)),
        ("n_pred", str(prf.n_pred)),
        ("n_correct", str(prf.n_correct)),
    ]


def metrics_items(report: "MetricsReport") -> List[Tuple[str, str]]:
    """
    Ordered (key, value) pairs of a metrics report.

    Pair metrics come first under bare keys, followed by
    `polarity.<TAG>.<key>` for every sentiment tag and `term.<key>` for
    span-only matching.
    """
    items = _prf_values(report.pairs)
    for tag in SENTIMENT_TAGS:
        items.extend((f"polarity.{tag}.{key}", value) for key, value in _prf_values(report.by_polarity[tag]))
    items.extend((f"term.{key}", value) for key, value in _prf_values(report.terms))
    return items


def format_metrics_report(report: "MetricsReport") -> str:
    return "".join(f"{key}={value}\n" for key, value in metrics_items(report))


def metrics_table(report: "MetricsReport", title: str = "Exact-match metrics") -> Table:
    table = Table(title=title)
    table.add_column("Scope")
    for key in PRF_KEYS:
        table.add_column(key, justify="right")

    def add(scope: str, prf: "PRF") -> None:
        table.add_row(scope, *(value for _, value in _prf_values(prf)))

    add("pairs", report.pairs)
    for tag in SENTIMENT_TAGS:
        add(tag, report.by_polarity[tag])
    add("terms", report.terms)
    return table


def label_stats_table(stats: "LabelStats") -> Table:
    """Counts and shares of every tag, one section per tag set."""
    table = Table(title=f"Label statistics ({stats.n_sentences} sentences, {stats.n_tokens} tokens)")
    table.add_column("Tag set")
    table.add_column("Tag")
    table.add_column("Count", justify="right")
    table.add_column("Share", justify="right")

    for set_name, counts in (("term", stats.term_counts), ("polarity", stats.polarity_counts)):
        for tag, count in counts.items():
            share = count / stats.n_tokens if stats.n_tokens else 0.0
            table.add_row(set_name, tag, str(count), f"{share:.4f}")
        table.add_section()

    ratio = stats.o_ratio
    table.add_row("O:term", "", f"{ratio:.2f}" if ratio is not None else MISSING, "")
    return table


def pair_counts(corpus: Iterable["TaggedSentence"]) -> Counter:
    """Aspect terms per polarity, counted from B tags."""
    counts: Counter = Counter({tag: 0 for tag in SENTIMENT_TAGS})
    for sentence in corpus:
        for term, polarity in zip(sentence.term_tags, sentence.polarity_tags):
            if term == "B":
                counts[polarity] += 1
    return counts


def pair_summary_table(corpus: Sequence["TaggedSentence"]) -> Table:
    counts = pair_counts(corpus)
    total = sum(counts.values())
    table = Table(title=f"Aspect terms ({total})")
    table.add_column("Polarity")
    table.add_column("Terms", justify="right")
    for tag in SENTIMENT_TAGS:
        table.add_row(tag, str(counts[tag]))
    return table


def format_prediction_dump(predictions: Iterable["SentencePrediction"]) -> str:
    """One line per sentence: space-separated begin:end:POLARITY triples."""
    return "".join(
        " ".join(pair.to_text() for pair in prediction.pairs) + "\n"
        for prediction in predictions
    )


def format_pair_list(pairs, limit: Optional[int] = None) -> str:
    """Human-readable pairs, e.g. `keyboard/POS, screen/NEG`."""
    pairs = list(pairs)
    shown = pairs if limit is None else pairs[:limit]
    text = ", ".join(f"{p.surface or f'{p.begin}:{p.end}'}/{p.polarity}" for p in shown)
    if limit is not None and len(pairs) > limit:
        text += ", ..."
    return text or MISSING


def token_rows(prediction: "SentencePrediction", gold: "TaggedSentence") -> List[Tuple[str, ...]]:
    """
    Per-token comparison rows for the inspector.

    Returns:
        Tuples of (index, token, gold term, predicted term, gold polarity,
        predicted polarity, marker) where marker is `*` on any disagreement.
    """
    rows = []
    for i, token in enumerate(prediction.tokens):
        gold_term, pred_term = gold.term_tags[i], prediction.term_tags[i]
        gold_pol, pred_pol = gold.polarity_tags[i], prediction.polarity_tags[i]
        marker = "*" if (gold_term, gold_pol) != (pred_term, pred_pol) else ""
        rows.append((str(i), token, gold_term, pred_term, gold_pol, pred_pol, marker))
    return rows


def epoch_table(records: Iterable) -> Table:
    """Per-epoch losses and dev F1 of a training run."""
    table = Table(title="Training")
    for name in ("stage", "phase", "epoch"):
        table.add_column(name, justify="right")
    for name in ("L_e", "L_c", "L_VAT", "F1_dev"):
        table.add_column(name, justify="right")
    for r in records:
        f1 = f"{r.F1_dev:.4f}" if r.F1_dev is not None else MISSING
        table.add_row(
            str(r.stage), str(r.phase), str(r.epoch),
            f"{r.L_e:.4f}", f"{r.L_c:.4f}", f"{r.L_VAT:.4f}", f1,
        )
    return table
