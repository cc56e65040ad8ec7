"""
Sentence List Screen - every evaluated sentence with gold and predicted pairs.
Sentences whose predicted pair set differs from the gold one are flagged.
"""

from typing import List, Sequence

from textual.app import ComposeResult
from textual.binding import Binding
from textual.containers import Container
from textual.screen import Screen
from textual.widgets import ListItem, ListView, Static

from data.corpus import TaggedSentence
from training.inference import SentencePrediction
from utils.formatters import format_pair_list
from utils.logging import get_logger
from widgets import FooterBar, HeaderBar

# Display formatting constants
LINE_WIDTH = 76
INDEX_WIDTH = 4
PAIR_INDENT = 7
ELLIPSIS = "..."
MISMATCH_MARK = "!"

logger = get_logger(__name__)


def truncate(text: str, width: int) -> str:
    if len(text) > width:
        return text[:width - len(ELLIPSIS)] + ELLIPSIS
    return text


class SentenceItem(ListItem):
    """One sentence: text on the first line, gold and predicted pairs below."""

    def __init__(self, index: int, prediction: SentencePrediction, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.index = index
        self.prediction = prediction

    def compose(self) -> ComposeResult:
        mark = " " if self.prediction.correct else MISMATCH_MARK
        text = truncate(" ".join(self.prediction.tokens), LINE_WIDTH - INDEX_WIDTH - 3)
        indent = " " * PAIR_INDENT
        width = LINE_WIDTH - PAIR_INDENT - 6
        gold = truncate(format_pair_list(self.prediction.gold_pairs), width)
        pred = truncate(format_pair_list(self.prediction.pairs), width)
        content = f"{self.index:>{INDEX_WIDTH}}.{mark} {text}\n{indent}gold {gold}\n{indent}pred {pred}"
        yield Static(content, classes="sentence-item-text")


class SentenceListScreen(Screen):
    """
    Scrollable list of predictions; Enter opens the token table of the
    highlighted sentence, M toggles showing mismatches only.
    """

    BINDINGS = [
        Binding("escape", "quit", "Quit"),
        Binding("q", "quit", "Quit", show=False),
        Binding("m", "toggle_mismatches", "Mismatches"),
        Binding("home", "go_home", "Home", show=False),
        Binding("end", "go_end", "End", show=False),
        Binding("f1", "show_help", "Help"),
    ]

    def __init__(
        self,
        predictions: Sequence[SentencePrediction],
        sentences: Sequence[TaggedSentence],
        source: str = "",
        *args,
        **kwargs
    ):
        super().__init__(*args, **kwargs)
        self.predictions = list(predictions)
        self.sentences = list(sentences)
        self.source = source
        self.mismatches_only = False

    @property
    def n_correct(self) -> int:
        return sum(1 for p in self.predictions if p.correct)

    def visible_indices(self) -> List[int]:
        """Corpus indices currently listed."""
        return [
            i for i, p in enumerate(self.predictions)
            if not self.mismatches_only or not p.correct
        ]

    def compose(self) -> ComposeResult:
        yield HeaderBar(
            heading="Predictions",
            subtitle="",
            source=self.source,
            status=f"{self.n_correct}/{len(self.predictions)} exact",
            id="header",
        )

        with Container(id="main-content"):
            yield Static("", id="list-info")
            yield ListView(id="sentence-list")

        yield FooterBar(
            shortcuts="Enter=Tokens, M=Mismatches only, F1=Help, Esc=Quit",
            id="status-bar",
        )

    def on_mount(self) -> None:
        logger.debug(f"SentenceListScreen mounted with {len(self.predictions)} sentences")
        self._populate()

    def _populate(self) -> None:
        sentence_list = self.query_one("#sentence-list", ListView)
        sentence_list.clear()
        indices = self.visible_indices()
        for i in indices:
            sentence_list.append(SentenceItem(i + 1, self.predictions[i]))

        info = self.query_one("#list-info", Static)
        scope = "mismatched sentences" if self.mismatches_only else "sentences"
        if indices:
            info.update(f"{len(indices)} {scope} ({MISMATCH_MARK} = predicted pairs differ from gold)")
            sentence_list.index = 0
        else:
            info.update(f"No {scope}.")
        sentence_list.focus()

    def on_list_view_selected(self, event: ListView.Selected) -> None:
        item = event.item
        if isinstance(item, SentenceItem):
            self._show_tokens(item.index - 1)

    def _show_tokens(self, corpus_index: int) -> None:
        self.app.push_screen(
            "tokens",
            {
                "index": corpus_index,
                "prediction": self.predictions[corpus_index],
                "sentence": self.sentences[corpus_index],
            },
        )

    def action_toggle_mismatches(self) -> None:
        self.mismatches_only = not self.mismatches_only
        self._populate()

    def action_go_home(self) -> None:
        sentence_list = self.query_one("#sentence-list", ListView)
        if sentence_list.children:
            sentence_list.index = 0

    def action_go_end(self) -> None:
        sentence_list = self.query_one("#sentence-list", ListView)
        if sentence_list.children:
            sentence_list.index = len(sentence_list.children) - 1

    def action_show_help(self) -> None:
        self.app.push_screen("help", {"context": "sentences"})

    def action_quit(self) -> None:
        self.app.exit()
