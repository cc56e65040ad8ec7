"""
Sentence → id sequences with [CLS]/[SEP] framing.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from data.corpus import TaggedSentence
from data.schema import POL_O, TERM_O
from data.vocab import CLS_ID, SEP_ID, Vocab
from utils.logging import get_logger


logger = get_logger(__name__)


@dataclass
class EncodedExample:
    """
    Framed id sequences of length n + 2.

    The special positions carry `O` in both tag sets and are excluded by
    loss_mask.
    """
    token_ids: np.ndarray
    term_ids: np.ndarray
    polarity_ids: np.ndarray
    loss_mask: np.ndarray
    sentence: TaggedSentence

    def __len__(self) -> int:
        return len(self.token_ids)

    @property
    def n_tokens(self) -> int:
        return len(self.token_ids) - 2


def encode_example(
    sentence: TaggedSentence,
    vocab: Vocab,
    max_len: int,
) -> Tuple[Optional[EncodedExample], Optional[str]]:
    """
    Encode one sentence.

    Returns:
        Tuple of (example, error); over-long sentences are never truncated
        and come back as (None, reason).
    """
    n = len(sentence)
    if n + 2 > max_len:
        return None, f"sentence of {n} tokens exceeds max_len {max_len} with specials"

    token_ids = np.array([CLS_ID] + vocab.ids(sentence.tokens) + [SEP_ID], dtype=np.int64)
    term_ids = np.array([TERM_O] + sentence.term_ids + [TERM_O], dtype=np.int64)
    polarity_ids = np.array([POL_O] + sentence.polarity_ids + [POL_O], dtype=np.int64)
    loss_mask = np.zeros(n + 2, dtype=np.int64)
    loss_mask[1:n + 1] = 1
    return EncodedExample(token_ids, term_ids, polarity_ids, loss_mask, sentence), None


def encode_corpus(
    sentences: Sequence[TaggedSentence],
    vocab: Vocab,
    max_len: int,
) -> Tuple[List[EncodedExample], int]:
    """Encode every sentence that fits; returns (examples, skipped count)."""
    examples: List[EncodedExample] = []
    skipped = 0
    for i, sentence in enumerate(sentences):
        example, error = encode_example(sentence, vocab, max_len)
        if example is None:
            skipped += 1
            where = f"line {sentence.first_line}" if sentence.first_line else f"sentence {i}"
            logger.warning(f"Skipping {where}: {error}")
            continue
        examples.append(example)
    if skipped:
        logger.info(f"Encoded {len(examples)} sentences, skipped {skipped}")
    return examples, skipped
