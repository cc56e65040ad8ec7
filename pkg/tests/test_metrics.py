import random

import numpy as np
import pytest

from decoding.spans import AspectPolarityPair
from evaluation.export import export_gradient_stats, format_gradient_stats
from evaluation.metrics import evaluate_pairs, label_stats, pair_prf, polarity_prf, prf_from_counts, term_prf
from losses.ghm import GradientHistogram, update_and_weights
from training.inference import SentencePrediction
from utils.errors import DataError
from utils.formatters import PRF_KEYS, format_metrics_report, format_pair_list, metrics_items, token_rows


POLARITIES = ["POS", "NEU", "NEG", "CON"]


def pair(begin, end, polarity="POS", surface=""):
    return AspectPolarityPair(begin, end, polarity, surface)


def random_pairs(rng, n_tokens):
    pairs, position = [], 0
    while True:
        start = position + rng.randint(0, 2)
        end = start + rng.randint(1, 2)
        if end > n_tokens:
            return pairs
        pairs.append(pair(start, end, rng.choice(POLARITIES)))
        position = end


class TestPairScores:
    def test_identity(self):
        gold = [[pair(0, 1), pair(2, 4, "NEG")], [pair(1, 2, "NEU")]]
        prf = pair_prf(gold, gold)
        assert prf.scores == (1.0, 1.0, 1.0) and prf.empty == []

    def test_empty_prediction(self):
        prf = pair_prf([[pair(0, 1)]], [[]])
        assert prf.scores == (0.0, 0.0, 0.0)
        assert "precision" in prf.empty

    def test_polarity_must_match(self):
        gold = [[pair(0, 1, "POS"), pair(2, 3, "NEG")]]
        pred = [[pair(0, 1, "POS"), pair(2, 3, "POS")]]
        prf = pair_prf(gold, pred)
        assert prf.scores == (0.5, 0.5, 0.5)
        assert term_prf([[(0, 1), (2, 3)]], [[(0, 1), (2, 3)]]).f1 == 1.0

    def test_matches_brute_force(self):
        rng = random.Random(3)
        for _ in range(200):
            gold = [random_pairs(rng, rng.randint(1, 10)) for _ in range(5)]
            pred = [random_pairs(rng, rng.randint(1, 10)) for _ in range(5)]
            correct = sum(
                1
                for g, p in zip(gold, pred)
                for x in p
                if any((x.begin, x.end, x.polarity) == (y.begin, y.end, y.polarity) for y in g)
            )
            n_gold = sum(len(g) for g in gold)
            n_pred = sum(len(p) for p in pred)
            prf = pair_prf(gold, pred)
            assert (prf.n_gold, prf.n_pred, prf.n_correct) == (n_gold, n_pred, correct)
            if n_pred and n_gold and correct:
                precision, recall = correct / n_pred, correct / n_gold
                assert prf.f1 == pytest.approx(2 * precision * recall / (precision + recall))

    def test_sentence_count_mismatch(self):
        with pytest.raises(ValueError):
            pair_prf([[]], [[], []])

    def test_counts_without_anything(self):
        prf = prf_from_counts(0, 0, 0)
        assert prf.scores == (0.0, 0.0, 0.0)
        assert prf.empty == ["precision", "recall", "f1"]


class TestPolarityBreakdown:
    def test_per_tag_counts(self):
        gold = [[pair(0, 1, "POS"), pair(2, 3, "NEG")], [pair(0, 2, "NEG")]]
        pred = [[pair(0, 1, "POS"), pair(2, 3, "POS")], [pair(0, 2, "NEG")]]
        by_tag = polarity_prf(gold, pred)
        assert set(by_tag) == set(POLARITIES)
        assert (by_tag["POS"].n_gold, by_tag["POS"].n_pred, by_tag["POS"].n_correct) == (1, 2, 1)
        assert (by_tag["NEG"].n_gold, by_tag["NEG"].n_pred, by_tag["NEG"].n_correct) == (2, 1, 1)
        assert by_tag["CON"].n_gold == 0

    def test_report(self):
        gold = [[pair(0, 1, "POS")], [pair(1, 3, "NEU")]]
        report = evaluate_pairs(gold, [[pair(0, 1, "POS")], [pair(1, 3, "NEG")]], neutral_fallbacks=2)
        assert report.n_sentences == 2 and report.neutral_fallbacks == 2
        assert report.pairs.n_correct == 1 and report.terms.n_correct == 2


class TestLabelStats:
    def test_counts(self, make_sentence):
        stats = label_stats([make_sentence(("a", "O", "O"), ("b", "B", "POS"), ("c", "I", "POS"))])
        assert stats.term_counts == {"B": 1, "I": 1, "O": 1}
        assert stats.polarity_counts["POS"] == 2
        assert stats.o_share == pytest.approx(1 / 3)
        assert stats.o_ratio == pytest.approx(0.5)

    def test_no_terms(self, make_sentence):
        assert label_stats([make_sentence(("a", "O", "O"))]).o_ratio is None

    def test_order_invariant(self, small_corpus):
        shuffled = list(small_corpus)
        random.Random(8).shuffle(shuffled)
        a, b = label_stats(small_corpus), label_stats(shuffled)
        assert (a.term_counts, a.polarity_counts, a.n_tokens) == (b.term_counts, b.polarity_counts, b.n_tokens)


class TestGradientStatsExport:
    def snapshots(self):
        hist = GradientHistogram(bins=4)
        p = np.array([[0.9, 0.1], [0.3, 0.7], [0.5, 0.5]])
        update_and_weights(p, np.zeros(3, dtype=np.int64), hist)
        return [hist.snapshot(epoch=1, task="ate")]

    def test_layout(self, tmp_path):
        path = export_gradient_stats(self.snapshots(), tmp_path / "gradient_stats.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        assert lines[0].startswith("0.000000,0.250000,")
        assert lines[-1] == "# epoch=1 task=ate labels=3"
        assert sum(int(line.split(",")[2]) for line in lines[:4]) == 3

    def test_re_export_is_identical(self, tmp_path):
        snaps = self.snapshots()
        first = export_gradient_stats(snaps, tmp_path / "a.csv").read_bytes()
        second = export_gradient_stats(snaps, tmp_path / "b.csv").read_bytes()
        assert first == second
        assert first.decode("utf-8") == format_gradient_stats(snaps)

    def test_append_keeps_earlier_snapshots(self, tmp_path):
        path = tmp_path / "stats.csv"
        export_gradient_stats(self.snapshots(), path)
        export_gradient_stats(self.snapshots(), path, append=True)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 10
        assert lines[4] == lines[9] == "# epoch=1 task=ate labels=3"

    def test_no_snapshots(self, tmp_path):
        with pytest.raises(DataError):
            export_gradient_stats([], tmp_path / "stats.csv")


class TestFormatters:
    def test_metrics_items_keys(self):
        report = evaluate_pairs([[pair(0, 1)]], [[pair(0, 1)]])
        keys = [key for key, _ in metrics_items(report)]
        assert keys[:len(PRF_KEYS)] == list(PRF_KEYS)
        assert "polarity.CON.f1" in keys and "term.recall" in keys
        assert format_metrics_report(report).startswith("precision=1.000000\n")

    def test_pair_list(self):
        pairs = [pair(0, 1, "POS", "keyboard"), pair(2, 3, "NEG")]
        assert format_pair_list(pairs) == "keyboard/POS, 2:3/NEG"
        assert format_pair_list(pairs, limit=1) == "keyboard/POS, ..."

    def test_token_rows_mark_disagreements(self, make_sentence):
        gold = make_sentence(("the", "O", "O"), ("fan", "B", "NEG"))
        prediction = SentencePrediction(["the", "fan"], ["O", "B"], ["O", "POS"])
        rows = token_rows(prediction, gold)
        assert rows[0] == ("0", "the", "O", "O", "O", "O", "")
        assert rows[1] == ("1", "fan", "B", "B", "NEG", "POS", "*")
