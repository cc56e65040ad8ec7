"""
Synthetic review corpus with gold aspect terms and polarities.

Sentences come from a small template grammar over a ~200-word lexicon.
Polarity is a deterministic function of the lexicon: the adjective (or
neutral verb) of a template decides the polarity of every term it
describes. Filler words pad sentences so that the corpus-wide ratio of
`O` tokens to term tokens follows the imbalance knob, and no sentence is
padded beyond max_tokens.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, TypeVar

import numpy as np

from data.corpus import TaggedSentence
from utils.logging import get_logger


logger = get_logger(__name__)

DEFAULT_IMBALANCE = 20.0

# The desk preset's max_len of 160 less [CLS] and [SEP]
DEFAULT_MAX_TOKENS = 158

T = TypeVar("T")

# Aspect terms (one or two words)
ASPECTS = [
    "screen", "keyboard", "battery", "battery life", "touch pad", "trackpad",
    "hard drive", "speakers", "webcam", "fan", "charger", "price", "display",
    "graphics card", "memory", "processor", "operating system", "software",
    "customer service", "warranty", "design", "case", "hinge", "ports",
    "wifi", "bluetooth", "camera", "sound quality", "screen resolution",
    "power supply", "boot time", "start menu", "mouse", "cd drive",
    "motherboard", "cooling", "touch screen", "backlight", "usb ports",
    "windows xp", "tech support", "build quality", "food", "service", "staff",
]

POSITIVE = [
    "great", "excellent", "amazing", "fantastic", "good", "superb", "fast",
    "reliable", "sleek", "brilliant", "solid", "perfect", "wonderful",
    "impressive", "crisp", "responsive", "awesome", "lovely", "quiet", "sturdy",
]

NEGATIVE = [
    "terrible", "awful", "horrible", "bad", "slow", "poor", "flimsy",
    "disappointing", "noisy", "useless", "dim", "buggy", "weak", "broken",
    "unreliable", "sluggish", "cheap", "mediocre", "annoying", "loud",
]

# Verbs that mention a term without judging it
NEUTRAL_VERBS = [
    "used", "installed", "checked", "replaced", "updated", "opened",
    "cleaned", "tested", "configured", "mentioned", "reset", "described",
]

FILLER_PHRASES = [
    ["to", "be", "honest"],
    ["after", "a", "few", "weeks"],
    ["i", "have", "to", "say", "that"],
    ["compared", "to", "my", "old", "one"],
    ["in", "my", "opinion"],
    ["as", "far", "as", "i", "can", "tell"],
    ["for", "what", "it", "is", "worth"],
    ["when", "i", "got", "home", "from", "work"],
    ["my", "friend", "told", "me", "about", "it"],
    ["i", "bought", "it", "last", "month"],
    ["overall"],
    ["anyway"],
    ["on", "the", "whole"],
    ["at", "this", "point"],
    ["so", "far"],
    ["if", "you", "ask", "me"],
    ["which", "surprised", "me", "a", "little"],
    ["during", "the", "first", "week"],
    ["every", "single", "morning"],
    ["on", "my", "desk", "at", "the", "office"],
    ["while", "travelling", "for", "business"],
    ["according", "to", "the", "manual"],
    ["without", "any", "doubt"],
    ["just", "like", "my", "brother", "said"],
    ["as", "expected", "from", "this", "brand"],
    ["since", "the", "day", "it", "arrived"],
    ["before", "the", "trip", "to", "paris"],
    ["yesterday", "evening"],
    ["two", "days", "ago"],
    ["once", "again"],
]

FILLER_WORDS = [
    "really", "honestly", "well", "still", "actually", "then", "also",
    "today", "again", "now", "indeed", "though",
]

POS_TAG = "POS"
NEU_TAG = "NEU"
NEG_TAG = "NEG"
CON_TAG = "CON"


@dataclass
class _Piece:
    """A run of tokens that is either plain text or one aspect term."""
    words: List[str]
    polarity: str = "O"  # O for plain text

    def tagged(self) -> List[Tuple[str, str, str]]:
        if self.polarity == "O":
            return [(w, "O", "O") for w in self.words]
        return [
            (w, "B" if i == 0 else "I", self.polarity)
            for i, w in enumerate(self.words)
        ]


def _choice(rng: np.random.Generator, items: Sequence[T]) -> T:
    return items[int(rng.integers(len(items)))]


def _term(rng: np.random.Generator, polarity: str) -> _Piece:
    return _Piece(_choice(rng, ASPECTS).split(), polarity)


def _text(*words: str) -> _Piece:
    return _Piece(list(words))


def _single_aspect(rng: np.random.Generator) -> List[_Piece]:
    """(a) one term judged by one adjective."""
    positive = rng.random() < 0.5
    adjective = _choice(rng, POSITIVE if positive else NEGATIVE)
    polarity = POS_TAG if positive else NEG_TAG
    term = _term(rng, polarity)
    pattern = int(rng.integers(4))
    if pattern == 0:
        return [_text("the"), term, _text("is", adjective)]
    if pattern == 1:
        return [_text("the"), term, _text("was", "really", adjective)]
    if pattern == 2:
        return [_text("i", "found", "the"), term, _text(adjective)]
    return [_text("the"), term, _text("seems", adjective)]


def _coordinated(rng: np.random.Generator) -> List[_Piece]:
    """(b) two or three terms sharing the sentiment of one trailing adjective."""
    positive = rng.random() < 0.5
    adjective = _choice(rng, POSITIVE if positive else NEGATIVE)
    polarity = POS_TAG if positive else NEG_TAG
    count = 3 if rng.random() < 0.25 else 2
    names = [ASPECTS[int(i)] for i in rng.choice(len(ASPECTS), size=count, replace=False)]
    terms = [_Piece(name.split(), polarity) for name in names]
    if count == 2:
        if rng.random() < 0.5:
            return [_text("the"), terms[0], _text("and", "the"), terms[1], _text("are", adjective)]
        return [_text("both", "the"), terms[0], _text("and", "the"), terms[1], _text("are", adjective)]
    return [
        _text("the"), terms[0], _text(",", "the"), terms[1],
        _text("and", "the"), terms[2], _text("are", "all", adjective),
    ]


def _neutral(rng: np.random.Generator) -> List[_Piece]:
    """(c) a term mentioned without judgement."""
    verb = _choice(rng, NEUTRAL_VERBS)
    term = _term(rng, NEU_TAG)
    if rng.random() < 0.5:
        return [_text("i", verb, "the"), term, _text("yesterday")]
    return [_text("we", verb, "the"), term, _text("last", "week")]


def _conflict(rng: np.random.Generator) -> List[_Piece]:
    """(d) one term with both a positive and a negative judgement."""
    good = _choice(rng, POSITIVE)
    bad = _choice(rng, NEGATIVE)
    first, second = (good, bad) if rng.random() < 0.5 else (bad, good)
    term = _term(rng, CON_TAG)
    return [_text("the"), term, _text("is", first, "but", second, "enough")]


FAMILIES = {
    "single": _single_aspect,
    "coordinated": _coordinated,
    "neutral": _neutral,
    "conflict": _conflict,
}

FAMILY_WEIGHTS: Dict[str, float] = {"single": 0.45, "coordinated": 0.35, "neutral": 0.2}
CONFLICT_WEIGHTS: Dict[str, float] = {"single": 0.4, "coordinated": 0.3, "neutral": 0.18, "conflict": 0.12}


def _filler(rng: np.random.Generator, count: int) -> List[str]:
    """Exactly `count` filler tokens."""
    words: List[str] = []
    while len(words) < count:
        remaining = count - len(words)
        phrase = _choice(rng, FILLER_PHRASES)
        if len(phrase) <= remaining:
            words.extend(phrase)
        else:
            words.append(_choice(rng, FILLER_WORDS))
    return words


def _pick_family(rng: np.random.Generator, weights: Dict[str, float]) -> str:
    names = list(weights)
    p = np.array([weights[n] for n in names], dtype=np.float64)
    return names[int(rng.choice(len(names), p=p / p.sum()))]


def synth_generate(
    n_sentences: int,
    seed: int,
    imbalance: float = DEFAULT_IMBALANCE,
    conflict: bool = False,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> List[TaggedSentence]:
    """
    Generate a tagged corpus.

    Each sentence is padded towards the corpus-wide target, and a
    shortfall left by the max_tokens cap carries over to the sentences
    that follow. Templates are never cut, so a template longer than
    max_tokens is emitted unpadded.

    Args:
        n_sentences: Number of sentences (>= 1)
        seed: Seed for the generator; equal seeds give equal corpora
        imbalance: Target corpus-wide ratio of O tokens to term tokens
        conflict: Include the conflicting-sentiment family (CON terms)
        max_tokens: Longest padded sentence, in tokens (>= 1)

    Returns:
        List of TaggedSentence
    """
    if n_sentences < 1:
        raise ValueError(f"n_sentences must be >= 1, got {n_sentences}")
    if imbalance < 0:
        raise ValueError(f"imbalance must be >= 0, got {imbalance}")
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")

    rng = np.random.default_rng(seed)
    weights = CONFLICT_WEIGHTS if conflict else FAMILY_WEIGHTS
    sentences: List[TaggedSentence] = []
    total_o = 0
    total_terms = 0
    capped = 0

    for _ in range(n_sentences):
        pieces = FAMILIES[_pick_family(rng, weights)](rng)
        core = [triple for piece in pieces for triple in piece.tagged()]
        n_term = sum(1 for _, term, _ in core if term != "O")
        n_o = len(core) - n_term
        total_terms += n_term
        deficit = max(0, round(imbalance * total_terms) - (total_o + n_o))
        room = max(0, max_tokens - len(core))
        if deficit > room:
            capped += 1
        padding = _filler(rng, min(deficit, room))
        split = int(rng.integers(0, len(padding) + 1))
        triples = (
            [(w, "O", "O") for w in padding[:split]]
            + core
            + [(w, "O", "O") for w in padding[split:]]
        )
        total_o += n_o + len(padding)
        tokens, terms, polarities = (list(x) for x in zip(*triples))
        sentences.append(TaggedSentence(tokens, terms, polarities))

    if capped:
        logger.debug(f"{capped} sentences reached max_tokens={max_tokens} before their padding target")
    logger.debug(
        f"Generated {n_sentences} sentences (seed={seed}): "
        f"{total_o} O tokens, {total_terms} term tokens"
    )
    return sentences


def lexicon() -> List[str]:
    """Every word the grammar can emit."""
    words = set()
    for name in ASPECTS:
        words.update(name.split())
    words.update(POSITIVE, NEGATIVE, NEUTRAL_VERBS, FILLER_WORDS)
    for phrase in FILLER_PHRASES:
        words.update(phrase)
    words.update([
        "the", "is", "was", "really", "i", "found", "seems", "and", "are",
        "both", ",", "all", "we", "yesterday", "last", "week", "but", "enough",
    ])
    return sorted(words)
