"""
Tagged-sentence corpora and their tab-separated wire format.

One token per line with three tab-separated fields (token, term tag,
polarity tag); a blank line ends a sentence; a line starting with `#` is
a comment.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from data.schema import SCHEMA
from utils.errors import CorpusErrorKind, CorpusFormatError, DataError
from utils.logging import get_logger


logger = get_logger(__name__)

FIELD_SEPARATOR = "\t"
COMMENT_PREFIX = "#"


@dataclass
class TaggedSentence:
    """A token sequence with parallel term and polarity tags."""
    tokens: List[str]
    term_tags: List[str]
    polarity_tags: List[str]
    first_line: int = 0  # 1-based source line of the first token, 0 if generated
    last_line: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def raw_text(self) -> str:
        return " ".join(self.tokens)

    @property
    def offsets(self) -> List[Tuple[int, int]]:
        """Character span of each token inside raw_text."""
        spans = []
        position = 0
        for token in self.tokens:
            spans.append((position, position + len(token)))
            position += len(token) + 1
        return spans

    @property
    def term_ids(self) -> List[int]:
        return [SCHEMA.term_id(t) for t in self.term_tags]

    @property
    def polarity_ids(self) -> List[int]:
        return [SCHEMA.polarity_id(t) for t in self.polarity_tags]


@dataclass
class SentenceIssue:
    """One invariant violation inside a sentence."""
    index: int
    kind: CorpusErrorKind
    message: str


def sentence_issues(sentence: TaggedSentence) -> List[SentenceIssue]:
    """
    Check every TaggedSentence invariant.

    Returns all violations in token order; an empty list means the
    sentence is well formed.
    """
    issues: List[SentenceIssue] = []
    n = len(sentence.tokens)
    if len(sentence.term_tags) != n or len(sentence.polarity_tags) != n:
        issues.append(SentenceIssue(
            0,
            CorpusErrorKind.FIELD_COUNT,
            f"{n} tokens, {len(sentence.term_tags)} term tags, {len(sentence.polarity_tags)} polarity tags",
        ))
        return issues

    term_polarity: Optional[str] = None
    previous = "O"
    for i, (token, term, polarity) in enumerate(zip(sentence.tokens, sentence.term_tags, sentence.polarity_tags)):
        if not token:
            issues.append(SentenceIssue(i, CorpusErrorKind.EMPTY_TOKEN, "token is empty"))
        if term not in SCHEMA.term_ids:
            issues.append(SentenceIssue(i, CorpusErrorKind.UNKNOWN_TAG, f"term tag '{term}' is not in {SCHEMA.term_tags}"))
            previous = "O"
            continue
        if polarity not in SCHEMA.polarity_ids:
            issues.append(SentenceIssue(i, CorpusErrorKind.UNKNOWN_TAG, f"polarity tag '{polarity}' is not in {SCHEMA.polarity_tags}"))
            previous = term
            continue
        if (term == "O") != (polarity == "O"):
            issues.append(SentenceIssue(
                i, CorpusErrorKind.POLARITY_MISMATCH,
                f"term tag '{term}' with polarity tag '{polarity}'",
            ))
        if term == "I" and previous == "O":
            issues.append(SentenceIssue(i, CorpusErrorKind.ORPHAN_INSIDE, f"'I' on '{token}' does not follow 'B' or 'I'"))
        if term == "B":
            term_polarity = polarity
        elif term == "I" and previous != "O" and term_polarity is not None and polarity != term_polarity:
            issues.append(SentenceIssue(
                i, CorpusErrorKind.INCONSISTENT_POLARITY,
                f"'{token}' has polarity '{polarity}' inside a '{term_polarity}' term",
            ))
        if term == "O":
            term_polarity = None
        previous = term
    return issues


def validate_sentence(sentence: TaggedSentence) -> Tuple[bool, Optional[str]]:
    """
    Validate a sentence.

    Returns:
        Tuple of (is_valid, error_message) describing the first violation.
    """
    issues = sentence_issues(sentence)
    if not issues:
        return True, None
    first = issues[0]
    return False, f"token {first.index}: {first.kind.value}: {first.message}"


def parse_corpus(lines: Iterable[str]) -> List[TaggedSentence]:
    """
    Parse wire-format lines into validated sentences.

    Raises:
        CorpusFormatError: naming the 1-based line of the first problem.
    """
    sentences: List[TaggedSentence] = []
    tokens: List[str] = []
    terms: List[str] = []
    polarities: List[str] = []
    first_line = 0

    def flush(last_line: int) -> None:
        nonlocal tokens, terms, polarities
        if tokens:
            sentence = TaggedSentence(tokens, terms, polarities, first_line, last_line)
            issues = sentence_issues(sentence)
            if issues:
                issue = issues[0]
                raise CorpusFormatError(first_line + issue.index, issue.kind, issue.message)
            sentences.append(sentence)
        tokens, terms, polarities = [], [], []

    line_no = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith(COMMENT_PREFIX):
            continue
        if not line.strip():
            flush(line_no - 1)
            continue
        fields = line.split(FIELD_SEPARATOR)
        if len(fields) != 3:
            raise CorpusFormatError(line_no, CorpusErrorKind.FIELD_COUNT, f"expected 3 tab-separated fields, got {len(fields)}")
        token, term, polarity = fields
        if not token:
            raise CorpusFormatError(line_no, CorpusErrorKind.EMPTY_TOKEN, "token is empty")
        if term not in SCHEMA.term_ids:
            raise CorpusFormatError(line_no, CorpusErrorKind.UNKNOWN_TAG, f"term tag '{term}' is not in {SCHEMA.term_tags}")
        if polarity not in SCHEMA.polarity_ids:
            raise CorpusFormatError(line_no, CorpusErrorKind.UNKNOWN_TAG, f"polarity tag '{polarity}' is not in {SCHEMA.polarity_tags}")
        if not tokens:
            first_line = line_no
        tokens.append(token)
        terms.append(term)
        polarities.append(polarity)
    flush(line_no)
    return sentences


def load_corpus(path: Path) -> List[TaggedSentence]:
    """Read and validate a UTF-8 corpus file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        sentences = parse_corpus(f)
    logger.info(f"Loaded {len(sentences)} sentences from {path}")
    return sentences


def format_corpus(sentences: Iterable[TaggedSentence]) -> str:
    """Serialize sentences to the wire format."""
    blocks = []
    for sentence in sentences:
        lines = []
        for token, term, polarity in zip(sentence.tokens, sentence.term_tags, sentence.polarity_tags):
            if token.startswith(COMMENT_PREFIX) or FIELD_SEPARATOR in token or not token.strip():
                raise DataError(f"token {token!r} cannot be written in the corpus format")
            lines.append(FIELD_SEPARATOR.join((token, term, polarity)))
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def save_corpus(sentences: Iterable[TaggedSentence], path: Path) -> None:
    """Write sentences to a corpus file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_corpus(sentences))
