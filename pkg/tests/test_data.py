import random

import numpy as np
import pytest

from data.batching import collate, epoch_order, make_batches
from data.corpus import (
    TaggedSentence,
    format_corpus,
    load_corpus,
    parse_corpus,
    save_corpus,
    sentence_issues,
    validate_sentence,
)
from data.encoding import encode_corpus, encode_example
from data.schema import POL_O, SCHEMA, TERM_O
from data.synth import DEFAULT_MAX_TOKENS, synth_generate
from data.vocab import CLS_ID, PAD_ID, SEP_ID, UNK_ID, Vocab
from decoding.spans import decode_pairs
from evaluation.metrics import label_stats
from utils.errors import CorpusErrorKind, CorpusFormatError, DataError


def lines(text):
    return text.splitlines(keepends=True)


class TestSchema:
    def test_stable_ids(self):
        assert [SCHEMA.term_id(t) for t in ("B", "I", "O")] == [0, 1, 2]
        assert [SCHEMA.polarity_id(t) for t in ("POS", "NEU", "NEG", "CON", "O")] == [0, 1, 2, 3, 4]
        assert SCHEMA.term_tag(TERM_O) == SCHEMA.polarity_tag(POL_O) == "O"


class TestParseCorpus:
    def test_minimal_block(self):
        [s] = parse_corpus(lines("The\tO\tO\nkeyboard\tB\tPOS\nrocks\tO\tO\n"))
        assert s.tokens == ["The", "keyboard", "rocks"]
        assert [p.key for p in decode_pairs(s.term_tags, s.polarity_tags)] == [(1, 2, "POS")]
        assert (s.first_line, s.last_line) == (1, 3)

    def test_blank_lines_and_comments(self):
        text = "# header\na\tO\tO\n\n\nb\tB\tNEG\nc\tI\tNEG\n# trailing\n"
        sentences = parse_corpus(lines(text))
        assert [s.tokens for s in sentences] == [["a"], ["b", "c"]]
        assert sentences[1].first_line == 5

    @pytest.mark.parametrize("text, line, kind", [
        ("a\tB\n", 1, CorpusErrorKind.FIELD_COUNT),
        ("a\tO\tO\nb\tXYZ\tPOS\n", 2, CorpusErrorKind.UNKNOWN_TAG),
        ("a\tO\tGOOD\n", 1, CorpusErrorKind.UNKNOWN_TAG),
        ("\tO\tO\n", 1, CorpusErrorKind.EMPTY_TOKEN),
        ("a\tB\tO\n", 1, CorpusErrorKind.POLARITY_MISMATCH),
        ("a\tO\tPOS\n", 1, CorpusErrorKind.POLARITY_MISMATCH),
        ("a\tO\tO\nb\tI\tPOS\n", 2, CorpusErrorKind.ORPHAN_INSIDE),
        ("# c\na\tB\tPOS\nb\tI\tNEG\n", 3, CorpusErrorKind.INCONSISTENT_POLARITY),
    ])
    def test_distinct_diagnostics(self, text, line, kind):
        with pytest.raises(CorpusFormatError) as info:
            parse_corpus(lines(text))
        assert info.value.line == line
        assert info.value.kind is kind
        assert f"line {line}" in str(info.value)

    def test_round_trip_random_sentences(self, tmp_path):
        corpus = synth_generate(1000, seed=21, imbalance=3.0, conflict=True)
        path = tmp_path / "corpus.txt"
        save_corpus(corpus, path)
        loaded = load_corpus(path)
        assert [(s.tokens, s.term_tags, s.polarity_tags) for s in loaded] == \
               [(s.tokens, s.term_tags, s.polarity_tags) for s in corpus]
        assert format_corpus(loaded) == path.read_text(encoding="utf-8")

    def test_unwritable_token(self, make_sentence):
        with pytest.raises(DataError):
            format_corpus([make_sentence(("a\tb", "O", "O"))])

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_corpus(tmp_path / "absent.txt")


class TestSentenceInvariants:
    def test_valid_sentence(self, make_sentence):
        s = make_sentence(("the", "O", "O"), ("hard", "B", "NEG"), ("drive", "I", "NEG"))
        assert validate_sentence(s) == (True, None)

    def test_length_mismatch(self):
        s = TaggedSentence(["a", "b"], ["O"], ["O", "O"])
        is_valid, message = validate_sentence(s)
        assert not is_valid and "field count" in message

    def test_reports_every_issue(self, make_sentence):
        s = make_sentence(("a", "I", "POS"), ("b", "O", "NEG"))
        kinds = [issue.kind for issue in sentence_issues(s)]
        assert kinds == [CorpusErrorKind.ORPHAN_INSIDE, CorpusErrorKind.POLARITY_MISMATCH]


class TestVocab:
    def test_specials_and_unknown(self, make_sentence):
        vocab = Vocab.build([make_sentence(("Screen", "B", "POS"), ("great", "O", "O"))])
        assert len(vocab) == 6
        assert vocab.id_of("[PAD]") == PAD_ID and vocab.id_of("[CLS]") == CLS_ID
        assert vocab.id_of("SCREEN") == vocab.id_of("screen") >= 4
        assert vocab.id_of("keyboard") == UNK_ID

    def test_order_by_count_then_lexicographic(self, make_sentence):
        corpus = [
            make_sentence(("b", "O", "O"), ("a", "O", "O"), ("c", "O", "O")),
            make_sentence(("c", "O", "O")),
        ]
        assert Vocab.build(corpus).tokens == ["c", "a", "b"]

    def test_build_is_order_independent(self, small_corpus):
        shuffled = list(small_corpus)
        random.Random(4).shuffle(shuffled)
        assert Vocab.build(shuffled).tokens == Vocab.build(small_corpus).tokens

    def test_min_count(self, make_sentence):
        corpus = [make_sentence(("x", "O", "O"), ("y", "O", "O")), make_sentence(("x", "O", "O"))]
        assert Vocab.build(corpus, min_count=2).tokens == ["x"]

    def test_save_and_load(self, small_vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        small_vocab.save(path)
        assert len(path.read_text(encoding="utf-8").splitlines()) == len(small_vocab) - 4
        assert Vocab.load(path).tokens == small_vocab.tokens

    def test_load_missing(self, tmp_path):
        with pytest.raises(DataError):
            Vocab.load(tmp_path / "none.txt")

    def test_duplicates_rejected(self):
        with pytest.raises(DataError):
            Vocab(tokens=["a", "a"])


class TestEncoding:
    def test_three_tokens(self, make_sentence):
        s = make_sentence(("the", "O", "O"), ("fan", "B", "NEG"), ("whines", "O", "O"))
        vocab = Vocab.build([s])
        ex, error = encode_example(s, vocab, max_len=10)
        assert error is None and len(ex) == 5 and ex.n_tokens == 3
        assert ex.token_ids[0] == CLS_ID and ex.token_ids[-1] == SEP_ID
        assert list(ex.loss_mask) == [0, 1, 1, 1, 0]
        assert list(ex.term_ids) == [TERM_O, TERM_O, 0, TERM_O, TERM_O]
        assert list(ex.polarity_ids) == [POL_O, POL_O, 2, POL_O, POL_O]

    def test_empty_sentence(self):
        ex, _ = encode_example(TaggedSentence([], [], []), Vocab(), max_len=4)
        assert list(ex.token_ids) == [CLS_ID, SEP_ID]
        assert list(ex.term_ids) == [TERM_O, TERM_O] and not ex.loss_mask.any()

    def test_unknown_tokens_keep_their_tags(self, make_sentence):
        s = make_sentence(("mystery", "B", "NEU"))
        ex, _ = encode_example(s, Vocab(), max_len=8)
        assert ex.token_ids[1] == UNK_ID and ex.term_ids[1] == 0 and ex.polarity_ids[1] == 1

    def test_overlength_is_skipped_not_truncated(self, make_sentence):
        s = make_sentence(*[("w", "O", "O")] * 5)
        ex, error = encode_example(s, Vocab(), max_len=6)
        assert ex is None and "max_len" in error
        examples, skipped = encode_corpus([s, make_sentence(("w", "O", "O"))], Vocab(), max_len=6)
        assert skipped == 1 and len(examples) == 1


class TestBatching:
    def test_collate_pads(self, small_examples):
        batch = collate(small_examples[:3])
        width = max(len(e) for e in small_examples[:3])
        assert batch.token_ids.shape == (3, width) and batch.size == 3 and batch.width == width
        for row, ex in enumerate(small_examples[:3]):
            n = len(ex)
            assert batch.attention_mask[row].sum() == n
            assert np.all(batch.token_ids[row, n:] == PAD_ID)
            assert np.all(batch.term_ids[row, n:] == TERM_O)
        assert batch.n_labels == sum(e.n_tokens for e in small_examples[:3])

    def test_corpus_order_without_seed(self, small_examples):
        batches = list(make_batches(small_examples, 5))
        assert [len(b.examples) for b in batches] == [5, 5, 5, 5, 4]
        assert [ex for b in batches for ex in b.examples] == small_examples

    def test_shuffle_is_a_pure_function(self, small_examples):
        a = [id(ex) for b in make_batches(small_examples, 7, seed=3, epoch=2, phase=1) for ex in b.examples]
        b = [id(ex) for b in make_batches(small_examples, 7, seed=3, epoch=2, phase=1) for ex in b.examples]
        assert a == b and sorted(a) == sorted(id(ex) for ex in small_examples)
        assert not np.array_equal(epoch_order(24, 3, 1), epoch_order(24, 3, 2))

    def test_rejects_bad_sizes(self, small_examples):
        with pytest.raises(ValueError):
            list(make_batches(small_examples, 0))
        with pytest.raises(ValueError):
            collate([])


class TestSynth:
    def test_same_seed_same_corpus(self):
        assert format_corpus(synth_generate(200, seed=9)) == format_corpus(synth_generate(200, seed=9))
        assert format_corpus(synth_generate(200, seed=9)) != format_corpus(synth_generate(200, seed=10))

    def test_sentences_are_valid(self):
        for s in synth_generate(500, seed=2, conflict=True):
            assert sentence_issues(s) == []

    def test_imbalance_knob(self):
        stats = label_stats(synth_generate(2000, seed=13, imbalance=20.0))
        assert abs(stats.o_ratio - 20.0) <= 2.0
        assert abs(stats.o_share - 20 / 21) <= 0.1 * 20 / 21

    def test_heavy_imbalance_respects_the_length_cap(self):
        corpus = synth_generate(2000, seed=13, imbalance=50.0)
        assert max(len(s.tokens) for s in corpus) <= DEFAULT_MAX_TOKENS
        assert abs(label_stats(corpus).o_ratio - 50.0) <= 5.0
        _, skipped = encode_corpus(corpus, Vocab.build(corpus), max_len=DEFAULT_MAX_TOKENS + 2)
        assert skipped == 0

    def test_short_cap_leaves_templates_whole(self):
        corpus = synth_generate(300, seed=3, imbalance=20.0, max_tokens=20)
        assert max(len(s.tokens) for s in corpus) <= 20
        assert all(sentence_issues(s) == [] for s in corpus)
        assert all(any(tag != "O" for tag in s.term_tags) for s in corpus)

    def test_coordinated_terms_share_polarity(self):
        coordinated = [
            s for s in synth_generate(300, seed=4, imbalance=0.0)
            if "and" in s.tokens and "but" not in s.tokens
        ]
        assert coordinated
        for s in coordinated:
            pairs = decode_pairs(s.term_tags, s.polarity_tags)
            assert len(pairs) >= 2
            assert len({p.polarity for p in pairs}) == 1

    def test_conflict_family_is_optional(self):
        plain = synth_generate(400, seed=6)
        assert all("CON" not in s.polarity_tags for s in plain)
        assert any("CON" in s.polarity_tags for s in synth_generate(400, seed=6, conflict=True))

    @pytest.mark.parametrize("n, imbalance, max_tokens", [(0, 20.0, 50), (5, -1.0, 50), (5, 20.0, 0)])
    def test_rejects_bad_arguments(self, n, imbalance, max_tokens):
        with pytest.raises(ValueError):
            synth_generate(n, seed=1, imbalance=imbalance, max_tokens=max_tokens)
