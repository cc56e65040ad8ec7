"""
Cascaded prediction: ATE argmax → repaired term labels → ASC queries.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from data.batching import make_batches
from data.encoding import EncodedExample
from data.schema import SCHEMA
from decoding.spans import FIRST_TOKEN, AspectPolarityPair, DecodeCounters, decode_pairs
from evaluation.metrics import MetricsReport, evaluate_pairs
from model.grace import GraceModel
from numcore.tensor import no_grad
from training.objective import polarity_logits
from utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class SentencePrediction:
    """Predicted tags and pairs of one sentence (specials stripped)."""
    tokens: List[str]
    term_tags: List[str]
    polarity_tags: List[str]
    pairs: List[AspectPolarityPair] = field(default_factory=list)
    gold_pairs: List[AspectPolarityPair] = field(default_factory=list)

    @property
    def correct(self) -> bool:
        return {p.key for p in self.pairs} == {p.key for p in self.gold_pairs}


def gold_pairs(example: EncodedExample, strategy: str = FIRST_TOKEN) -> List[AspectPolarityPair]:
    s = example.sentence
    return decode_pairs(s.term_tags, s.polarity_tags, strategy, tokens=s.tokens)


def predict_examples(
    model: GraceModel,
    examples: Sequence[EncodedExample],
    batch_size: int = 64,
    consistent: bool = False,
    strategy: str = FIRST_TOKEN,
    counters: Optional[DecodeCounters] = None,
) -> List[SentencePrediction]:
    """Predict every example in corpus order; parameters are only read."""
    counters = counters if counters is not None else DecodeCounters()
    predictions: List[SentencePrediction] = []
    with no_grad():
        for batch in make_batches(examples, batch_size):
            out = model.forward(batch.token_ids, batch.attention_mask)
            scores = polarity_logits(model, out.asc.hidden, out.q_labels, consistent)
            polarity_ids = np.asarray(scores.values).argmax(axis=-1)
            for row, example in enumerate(batch.examples):
                n = len(example)
                terms = [SCHEMA.term_tag(int(t)) for t in out.q_labels[row, 1:n - 1]]
                polarities = [SCHEMA.polarity_tag(int(t)) for t in polarity_ids[row, 1:n - 1]]
                tokens = example.sentence.tokens
                pairs = decode_pairs(terms, polarities, strategy, tokens=tokens, counters=counters)
                predictions.append(SentencePrediction(
                    tokens, terms, polarities, pairs, gold_pairs(example, strategy)
                ))
    if counters.neutral_fallbacks:
        logger.info(f"{counters.neutral_fallbacks} predicted terms had no polarity and were reported as NEU")
    return predictions


def evaluate_examples(
    model: GraceModel,
    examples: Sequence[EncodedExample],
    batch_size: int = 64,
    consistent: bool = False,
    strategy: str = FIRST_TOKEN,
) -> MetricsReport:
    counters = DecodeCounters()
    predictions = predict_examples(model, examples, batch_size, consistent, strategy, counters)
    return evaluate_pairs(
        [p.gold_pairs for p in predictions],
        [p.pairs for p in predictions],
        neutral_fallbacks=counters.neutral_fallbacks,
    )
