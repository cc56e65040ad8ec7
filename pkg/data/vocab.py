"""
Word-level vocabulary with fixed special tokens.
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List

from data.corpus import TaggedSentence
from utils.errors import DataError
from utils.logging import get_logger


logger = get_logger(__name__)

PAD = "[PAD]"
UNK = "[UNK]"
CLS = "[CLS]"
SEP = "[SEP]"
SPECIALS = (PAD, UNK, CLS, SEP)

PAD_ID = 0
UNK_ID = 1
CLS_ID = 2
SEP_ID = 3


def normalize(token: str) -> str:
    return token.lower()


@dataclass
class Vocab:
    """Dense token→id map; lookups are lowercased and unseen tokens map to [UNK]."""
    tokens: List[str] = field(default_factory=list)  # non-special tokens, id = 4 + index
    min_count: int = 1

    def __post_init__(self):
        self._ids: Dict[str, int] = {tok: i for i, tok in enumerate(SPECIALS)}
        for i, tok in enumerate(self.tokens):
            if tok in self._ids:
                raise DataError(f"duplicate vocabulary entry '{tok}'")
            self._ids[tok] = len(SPECIALS) + i

    def __len__(self) -> int:
        return len(SPECIALS) + len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return normalize(token) in self._ids

    def id_of(self, token: str) -> int:
        return self._ids.get(normalize(token), UNK_ID)

    def ids(self, tokens: Iterable[str]) -> List[int]:
        return [self.id_of(t) for t in tokens]

    def token_of(self, token_id: int) -> str:
        if token_id < len(SPECIALS):
            return SPECIALS[token_id]
        return self.tokens[token_id - len(SPECIALS)]

    @classmethod
    def build(cls, sentences: Iterable[TaggedSentence], min_count: int = 1) -> "Vocab":
        """
        Collect tokens seen at least min_count times.

        Ordered by descending count, ties broken lexicographically, so the
        result does not depend on corpus order.
        """
        counts: Counter = Counter()
        for sentence in sentences:
            counts.update(normalize(t) for t in sentence.tokens)
        for special in SPECIALS:
            counts.pop(special.lower(), None)
        kept = [tok for tok, n in counts.items() if n >= min_count]
        kept.sort(key=lambda tok: (-counts[tok], tok))
        logger.debug(f"Vocabulary: {len(kept)} of {len(counts)} token types kept (min_count={min_count})")
        return cls(tokens=kept, min_count=min_count)

    def save(self, path: Path) -> None:
        """One token per line; specials are implicit."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for tok in self.tokens:
                f.write(tok + "\n")

    @classmethod
    def load(cls, path: Path) -> "Vocab":
        path = Path(path)
        if not path.exists():
            raise DataError(f"vocabulary file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        return cls(tokens=tokens)
