"""
Tag schemas for joint aspect-term / aspect-sentiment labeling.

Term tags use the BIO scheme; polarity tags carry the sentiment of the
term a token belongs to, with their own `O` for tokens outside any term.
Ids are fixed and must never be renumbered (checkpoints depend on them).
"""

from dataclasses import dataclass
from typing import Dict, Tuple


# Term tags (BIO)
TERM_B = 0
TERM_I = 1
TERM_O = 2

# Polarity tags
POL_POS = 0
POL_NEU = 1
POL_NEG = 2
POL_CON = 3
POL_O = 4


@dataclass(frozen=True)
class TagSchema:
    """The two tag sets and their stable integer ids."""
    term_tags: Tuple[str, ...] = ("B", "I", "O")
    polarity_tags: Tuple[str, ...] = ("POS", "NEU", "NEG", "CON", "O")

    @property
    def term_ids(self) -> Dict[str, int]:
        return {tag: i for i, tag in enumerate(self.term_tags)}

    @property
    def polarity_ids(self) -> Dict[str, int]:
        return {tag: i for i, tag in enumerate(self.polarity_tags)}

    @property
    def n_term(self) -> int:
        return len(self.term_tags)

    @property
    def n_polarity(self) -> int:
        return len(self.polarity_tags)

    def term_id(self, tag: str) -> int:
        return self.term_ids[tag]

    def polarity_id(self, tag: str) -> int:
        return self.polarity_ids[tag]

    def term_tag(self, tag_id: int) -> str:
        return self.term_tags[tag_id]

    def polarity_tag(self, tag_id: int) -> str:
        return self.polarity_tags[tag_id]


SCHEMA = TagSchema()

# Polarities an aspect term can carry (everything except O)
SENTIMENT_TAGS = SCHEMA.polarity_tags[:POL_O]
