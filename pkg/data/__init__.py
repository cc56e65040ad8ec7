"""Tag schema, corpora, vocabulary, encoding and the synthetic generator."""

from .schema import SCHEMA, TagSchema
from .corpus import TaggedSentence, load_corpus, parse_corpus, save_corpus, validate_sentence
from .vocab import Vocab
from .encoding import EncodedExample, encode_corpus, encode_example
from .batching import Batch, collate, make_batches
from .synth import synth_generate

__all__ = [
    "SCHEMA",
    "TagSchema",
    "TaggedSentence",
    "load_corpus",
    "parse_corpus",
    "save_corpus",
    "validate_sentence",
    "Vocab",
    "EncodedExample",
    "encode_corpus",
    "encode_example",
    "Batch",
    "collate",
    "make_batches",
    "synth_generate",
]
