"""
Exact-match evaluation and label statistics.

All scores are micro-averaged over the corpus.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from data.corpus import TaggedSentence
from data.schema import SCHEMA, SENTIMENT_TAGS
from decoding.spans import AspectPolarityPair
from utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class PRF:
    """Precision, recall and F1 with the counts behind them."""
    precision: float
    recall: float
    f1: float
    n_gold: int
    n_pred: int
    n_correct: int
    empty: List[str] = field(default_factory=list)  # denominators that were 0

    @property
    def scores(self) -> Tuple[float, float, float]:
        return self.precision, self.recall, self.f1


def prf_from_counts(n_gold: int, n_pred: int, n_correct: int, label: str = "") -> PRF:
    """P/R/F1 with 0 for any empty denominator (reported in `empty`)."""
    empty = []
    if n_pred:
        precision = n_correct / n_pred
    else:
        precision = 0.0
        empty.append("precision")
    if n_gold:
        recall = n_correct / n_gold
    else:
        recall = 0.0
        empty.append("recall")
    if precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        empty.append("f1")
    if empty:
        logger.debug(f"Empty denominator for {label or 'scores'}: {', '.join(empty)} set to 0")
    return PRF(precision, recall, f1, n_gold, n_pred, n_correct, empty)


def _check_lengths(gold: Sequence, pred: Sequence) -> None:
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences but {len(pred)} predicted")


def _count(gold: Sequence[Set], pred: Sequence[Set]) -> Tuple[int, int, int]:
    n_gold = sum(len(g) for g in gold)
    n_pred = sum(len(p) for p in pred)
    n_correct = sum(len(g & p) for g, p in zip(gold, pred))
    return n_gold, n_pred, n_correct


def pair_prf(
    gold: Sequence[Iterable[AspectPolarityPair]],
    pred: Sequence[Iterable[AspectPolarityPair]],
) -> PRF:
    """A predicted pair is correct iff begin, end and polarity match a gold pair."""
    _check_lengths(gold, pred)
    gold_sets = [{p.key for p in sentence} for sentence in gold]
    pred_sets = [{p.key for p in sentence} for sentence in pred]
    return prf_from_counts(*_count(gold_sets, pred_sets), label="pairs")


def polarity_prf(
    gold: Sequence[Iterable[AspectPolarityPair]],
    pred: Sequence[Iterable[AspectPolarityPair]],
) -> Dict[str, PRF]:
    """pair_prf restricted to each sentiment tag in turn."""
    _check_lengths(gold, pred)
    gold = [list(s) for s in gold]
    pred = [list(s) for s in pred]
    result = {}
    for tag in SENTIMENT_TAGS:
        gold_sets = [{p.key for p in s if p.polarity == tag} for s in gold]
        pred_sets = [{p.key for p in s if p.polarity == tag} for s in pred]
        result[tag] = prf_from_counts(*_count(gold_sets, pred_sets), label=f"polarity {tag}")
    return result


def term_prf(
    gold_spans: Sequence[Iterable[Tuple[int, int]]],
    pred_spans: Sequence[Iterable[Tuple[int, int]]],
) -> PRF:
    """Exact span match ignoring polarity."""
    _check_lengths(gold_spans, pred_spans)
    gold_sets = [{(b, e) for b, e in s} for s in gold_spans]
    pred_sets = [{(b, e) for b, e in s} for s in pred_spans]
    return prf_from_counts(*_count(gold_sets, pred_sets), label="terms")


def spans_of(pairs: Iterable[AspectPolarityPair]) -> List[Tuple[int, int]]:
    return [(p.begin, p.end) for p in pairs]


@dataclass
class MetricsReport:
    """Everything the eval command prints."""
    pairs: PRF
    by_polarity: Dict[str, PRF]
    terms: PRF
    n_sentences: int = 0
    neutral_fallbacks: int = 0


def evaluate_pairs(
    gold: Sequence[Iterable[AspectPolarityPair]],
    pred: Sequence[Iterable[AspectPolarityPair]],
    neutral_fallbacks: int = 0,
) -> MetricsReport:
    gold = [list(s) for s in gold]
    pred = [list(s) for s in pred]
    report = MetricsReport(
        pairs=pair_prf(gold, pred),
        by_polarity=polarity_prf(gold, pred),
        terms=term_prf([spans_of(s) for s in gold], [spans_of(s) for s in pred]),
        n_sentences=len(gold),
        neutral_fallbacks=neutral_fallbacks,
    )
    if report.pairs.empty:
        logger.warning(f"Pair metrics had empty denominators: {', '.join(report.pairs.empty)}")
    return report


@dataclass
class LabelStats:
    """Tag counts per tag set."""
    term_counts: Dict[str, int]
    polarity_counts: Dict[str, int]
    n_tokens: int
    n_sentences: int

    @property
    def o_share(self) -> float:
        return self.term_counts["O"] / self.n_tokens if self.n_tokens else 0.0

    @property
    def o_ratio(self) -> Optional[float]:
        """O tokens per term token, None without any term token."""
        terms = self.n_tokens - self.term_counts["O"]
        return self.term_counts["O"] / terms if terms else None


def label_stats(corpus: Iterable[TaggedSentence]) -> LabelStats:
    term_counts = {tag: 0 for tag in SCHEMA.term_tags}
    polarity_counts = {tag: 0 for tag in SCHEMA.polarity_tags}
    n_tokens = 0
    n_sentences = 0
    for sentence in corpus:
        n_sentences += 1
        n_tokens += len(sentence)
        for tag in sentence.term_tags:
            term_counts[tag] += 1
        for tag in sentence.polarity_tags:
            polarity_counts[tag] += 1
    return LabelStats(term_counts, polarity_counts, n_tokens, n_sentences)
