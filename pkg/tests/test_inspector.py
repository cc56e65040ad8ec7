import asyncio

from app import InspectorApp
from decoding.spans import AspectPolarityPair
from screens import HelpScreen, SentenceListScreen, TokenDetailScreen
from screens.sentences import truncate
from training.inference import SentencePrediction
from utils.help_text import HELP_SECTIONS, get_help_for_screen, get_help_title


def predictions_and_sentences(make_sentence):
    right = SentencePrediction(
        ["the", "fan", "whines"], ["O", "B", "O"], ["O", "NEG", "O"],
        pairs=[AspectPolarityPair(1, 2, "NEG", "fan")],
        gold_pairs=[AspectPolarityPair(1, 2, "NEG", "fan")],
    )
    wrong = SentencePrediction(
        ["great", "screen"], ["O", "B"], ["O", "NEG"],
        pairs=[AspectPolarityPair(1, 2, "NEG", "screen")],
        gold_pairs=[AspectPolarityPair(1, 2, "POS", "screen")],
    )
    sentences = [
        make_sentence(("the", "O", "O"), ("fan", "B", "NEG"), ("whines", "O", "O")),
        make_sentence(("great", "O", "O"), ("screen", "B", "POS")),
    ]
    return [right, wrong], sentences


class TestHelpText:
    def test_every_screen_has_help(self):
        for name in ("sentences", "tokens"):
            assert name in HELP_SECTIONS
            assert get_help_title(name) in get_help_for_screen(name)

    def test_unknown_screen_falls_back(self):
        assert get_help_for_screen("nowhere") == get_help_for_screen("sentences")
        assert get_help_title("nowhere") == "HELP"


class TestSentenceList:
    def test_truncate(self):
        assert truncate("abcdef", 10) == "abcdef"
        assert truncate("abcdefghijkl", 8) == "abcde..."

    def test_mismatch_filter(self, make_sentence):
        predictions, sentences = predictions_and_sentences(make_sentence)
        screen = SentenceListScreen(predictions, sentences)
        assert screen.n_correct == 1
        assert screen.visible_indices() == [0, 1]
        screen.mismatches_only = True
        assert screen.visible_indices() == [1]


class TestInspectorApp:
    def test_navigation(self, make_sentence):
        predictions, sentences = predictions_and_sentences(make_sentence)
        app = InspectorApp(predictions, sentences, source="dev.txt")

        async def drive():
            async with app.run_test() as pilot:
                await pilot.pause()
                assert isinstance(app.screen, SentenceListScreen)
                await pilot.press("m")
                assert app.screen.mismatches_only
                await pilot.press("enter")
                await pilot.pause()
                assert isinstance(app.screen, TokenDetailScreen)
                assert app.screen.index == 1
                await pilot.press("f1")
                await pilot.pause()
                assert isinstance(app.screen, HelpScreen) and app.screen.context == "tokens"
                await pilot.press("escape")
                await pilot.press("escape")
                await pilot.pause()
                assert isinstance(app.screen, SentenceListScreen)

        asyncio.run(drive())

    def test_unknown_screen_name_is_ignored(self, make_sentence):
        predictions, sentences = predictions_and_sentences(make_sentence)
        app = InspectorApp(predictions, sentences)
        assert app._create_screen("settings", {}) is None
