"""
Padding encoded examples into rectangular batches.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np

from data.encoding import EncodedExample
from data.schema import POL_O, TERM_O
from data.vocab import PAD_ID


@dataclass
class Batch:
    """(batch, positions) arrays; padded positions have attention_mask 0."""
    token_ids: np.ndarray
    term_ids: np.ndarray
    polarity_ids: np.ndarray
    attention_mask: np.ndarray
    loss_mask: np.ndarray
    lengths: np.ndarray
    examples: List[EncodedExample]

    @property
    def size(self) -> int:
        return self.token_ids.shape[0]

    @property
    def width(self) -> int:
        return self.token_ids.shape[1]

    @property
    def n_labels(self) -> int:
        """Real-token positions counted by the losses."""
        return int(self.loss_mask.sum())


def collate(examples: Sequence[EncodedExample]) -> Batch:
    if not examples:
        raise ValueError("cannot collate an empty batch")
    width = max(len(ex) for ex in examples)
    size = len(examples)
    token_ids = np.full((size, width), PAD_ID, dtype=np.int64)
    term_ids = np.full((size, width), TERM_O, dtype=np.int64)
    polarity_ids = np.full((size, width), POL_O, dtype=np.int64)
    attention_mask = np.zeros((size, width), dtype=np.int64)
    loss_mask = np.zeros((size, width), dtype=np.int64)
    for i, ex in enumerate(examples):
        n = len(ex)
        token_ids[i, :n] = ex.token_ids
        term_ids[i, :n] = ex.term_ids
        polarity_ids[i, :n] = ex.polarity_ids
        attention_mask[i, :n] = 1
        loss_mask[i, :n] = ex.loss_mask
    lengths = np.array([len(ex) for ex in examples], dtype=np.int64)
    return Batch(token_ids, term_ids, polarity_ids, attention_mask, loss_mask, lengths, list(examples))


def epoch_order(n: int, seed: int, epoch: int, phase: int = 0) -> np.ndarray:
    """Shuffle order as a pure function of (seed, phase, epoch)."""
    return np.random.default_rng([seed, phase, epoch]).permutation(n)


def make_batches(
    examples: Sequence[EncodedExample],
    batch_size: int,
    seed: Optional[int] = None,
    epoch: int = 0,
    phase: int = 0,
) -> Iterator[Batch]:
    """
    Yield batches in shuffled order, or corpus order when seed is None.

    The last batch may be smaller.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    order = np.arange(len(examples)) if seed is None else epoch_order(len(examples), seed, epoch, phase)
    for start in range(0, len(order), batch_size):
        yield collate([examples[i] for i in order[start:start + batch_size]])
