"""
BIO spans, aspect-polarity pairs and the prediction dump format.

Indices are 0-based and half-open throughout: a term covering the second
and third tokens is [1, 3).
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from data.schema import POL_NEU, SCHEMA, TERM_B, TERM_I, TERM_O
from utils.errors import DataError, ShapeError
from utils.logging import get_logger


logger = get_logger(__name__)

FIRST_TOKEN = "first-token"
MAJORITY = "majority"
STRATEGIES = (FIRST_TOKEN, MAJORITY)


def _term_tags(tags: Sequence) -> List[str]:
    return [SCHEMA.term_tag(int(t)) if not isinstance(t, str) else t for t in tags]


def _polarity_tags(tags: Sequence) -> List[str]:
    return [SCHEMA.polarity_tag(int(t)) if not isinstance(t, str) else t for t in tags]


def is_valid_bio(term_tags: Sequence) -> bool:
    previous = "O"
    for tag in _term_tags(term_tags):
        if tag not in SCHEMA.term_ids:
            return False
        if tag == "I" and previous == "O":
            return False
        previous = tag
    return True


def repair_bio(term_tags: Sequence[str]) -> List[str]:
    """Rewrite every `I` that follows `O` (or starts the sequence) to `B`."""
    repaired = []
    previous = "O"
    for tag in term_tags:
        if tag == "I" and previous == "O":
            tag = "B"
        repaired.append(tag)
        previous = tag
    return repaired


def repair_bio_ids(term_ids: Sequence[int]) -> List[int]:
    repaired = []
    previous = TERM_O
    for tag in term_ids:
        tag = int(tag)
        if tag == TERM_I and previous == TERM_O:
            tag = TERM_B
        repaired.append(tag)
        previous = tag
    return repaired


@dataclass
class TokenBoundaries:
    """Per-token half-open span; `O` tokens own a singleton span."""
    begins: List[int]
    ends: List[int]

    def __post_init__(self):
        if len(self.begins) != len(self.ends):
            raise ShapeError("begins and ends differ in length")
        position = 0
        n = len(self.begins)
        while position < n:
            b, e = self.begins[position], self.ends[position]
            if b != position or not b < e <= n:
                raise ValueError(f"boundaries do not tile the sentence at position {position}")
            for j in range(b, e):
                if (self.begins[j], self.ends[j]) != (b, e):
                    raise ValueError(f"position {j} disagrees with its span [{b}, {e})")
            position = e

    def __len__(self) -> int:
        return len(self.begins)

    def span(self, i: int) -> Tuple[int, int]:
        return self.begins[i], self.ends[i]

    def spans(self) -> List[Tuple[int, int]]:
        """Distinct spans in order."""
        return sorted(set(zip(self.begins, self.ends)))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.begins, dtype=np.int64), np.asarray(self.ends, dtype=np.int64)


def extract_boundaries(term_tags: Sequence) -> TokenBoundaries:
    """
    Spans of a valid BIO sequence.

    Raises:
        ValueError: if the sequence is not valid BIO (repair it first).
    """
    tags = _term_tags(term_tags)
    if not is_valid_bio(tags):
        raise ValueError(f"invalid BIO sequence: {' '.join(tags)}")
    begins = [0] * len(tags)
    ends = [0] * len(tags)
    i = 0
    while i < len(tags):
        j = i + 1
        if tags[i] == "B":
            while j < len(tags) and tags[j] == "I":
                j += 1
        for k in range(i, j):
            begins[k], ends[k] = i, j
        i = j
    return TokenBoundaries(begins, ends)


def tags_from_boundaries(boundaries: TokenBoundaries, singleton_terms: Iterable[int] = ()) -> List[str]:
    """
    Term tags for a boundary set: multi-token spans become B I..., listed
    singleton positions become B, every other singleton is O.
    """
    singles = set(singleton_terms)
    tags = []
    for i in range(len(boundaries)):
        b, e = boundaries.span(i)
        if e - b > 1:
            tags.append("B" if i == b else "I")
        else:
            tags.append("B" if i in singles else "O")
    return tags


@dataclass(frozen=True, order=True)
class AspectPolarityPair:
    """One aspect term with its polarity; equality ignores the surface string."""
    begin: int
    end: int
    polarity: str
    surface: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.begin < self.end:
            raise ValueError(f"empty pair span [{self.begin}, {self.end})")
        if self.polarity not in SCHEMA.polarity_ids or self.polarity == "O":
            raise ValueError(f"pair polarity must be a sentiment tag, got '{self.polarity}'")

    @property
    def key(self) -> Tuple[int, int, str]:
        return self.begin, self.end, self.polarity

    def to_text(self) -> str:
        return f"{self.begin}:{self.end}:{self.polarity}"


@dataclass
class DecodeCounters:
    """Diagnostics accumulated while decoding."""
    pairs: int = 0
    neutral_fallbacks: int = 0  # runs whose polarity tags resolved to O


def _resolve_polarity(run: List[str], strategy: str) -> str:
    if strategy == FIRST_TOKEN:
        return run[0]
    counts = Counter(SCHEMA.polarity_id(tag) for tag in run)
    best = max(counts.values())
    return SCHEMA.polarity_tag(min(tag_id for tag_id, n in counts.items() if n == best))


def decode_pairs(
    term_tags: Sequence,
    polarity_tags: Sequence,
    strategy: str = FIRST_TOKEN,
    tokens: Optional[Sequence[str]] = None,
    counters: Optional[DecodeCounters] = None,
) -> List[AspectPolarityPair]:
    """
    One pair per B I* run, in sentence order.

    The run's polarity comes from its polarity tags by `strategy`; a run
    that resolves to `O` is reported as NEU and counted.
    """
    terms = _term_tags(term_tags)
    polarities = _polarity_tags(polarity_tags)
    if len(terms) != len(polarities):
        raise ShapeError(f"{len(terms)} term tags but {len(polarities)} polarity tags")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown polarity strategy '{strategy}'")

    pairs = []
    for begin, end in extract_boundaries(terms).spans():
        if terms[begin] != "B":
            continue
        polarity = _resolve_polarity(polarities[begin:end], strategy)
        if polarity == "O":
            polarity = SCHEMA.polarity_tag(POL_NEU)
            if counters is not None:
                counters.neutral_fallbacks += 1
            logger.debug(f"Term [{begin}, {end}) has no polarity; reporting NEU")
        surface = " ".join(tokens[begin:end]) if tokens is not None else ""
        pairs.append(AspectPolarityPair(begin, end, polarity, surface))
    if counters is not None:
        counters.pairs += len(pairs)
    return pairs


def tags_from_pairs(pairs: Iterable[AspectPolarityPair], n_tokens: int) -> Tuple[List[str], List[str]]:
    """Term and polarity tag sequences that decode back to `pairs`."""
    terms = ["O"] * n_tokens
    polarities = ["O"] * n_tokens
    for pair in sorted(pairs):
        if pair.end > n_tokens or any(t != "O" for t in terms[pair.begin:pair.end]):
            raise ValueError(f"pair {pair.to_text()} overlaps another pair or the sentence end")
        for i in range(pair.begin, pair.end):
            terms[i] = "B" if i == pair.begin else "I"
            polarities[i] = pair.polarity
    return terms, polarities


def format_pairs(pairs: Iterable[AspectPolarityPair]) -> str:
    """Dump line: space-separated begin:end:POLARITY triples."""
    return " ".join(pair.to_text() for pair in pairs)


def parse_pairs(line: str) -> List[AspectPolarityPair]:
    pairs = []
    for item in line.split():
        try:
            begin, end, polarity = item.split(":")
            pairs.append(AspectPolarityPair(int(begin), int(end), polarity))
        except ValueError as e:
            raise DataError(f"malformed pair '{item}': {e}") from None
    return pairs
