"""
Token Detail Screen - per-token gold and predicted tags of one sentence.
"""

from textual.app import ComposeResult
from textual.binding import Binding
from textual.containers import Container
from textual.screen import Screen
from textual.widgets import DataTable, Static

from data.corpus import TaggedSentence
from training.inference import SentencePrediction
from utils.formatters import format_pair_list, token_rows
from widgets import FooterBar, HeaderBar


TOKEN_COLUMNS = ("#", "Token", "Gold term", "Pred term", "Gold polarity", "Pred polarity", "")


class TokenDetailScreen(Screen):
    """
    Token table of one sentence.
    Rows where the prediction disagrees with gold carry a `*` marker.
    """

    BINDINGS = [
        Binding("escape", "go_back", "Back"),
        Binding("b", "go_back", "Back", show=False),
        Binding("q", "go_back", "Back", show=False),
        Binding("f1", "show_help", "Help"),
    ]

    def __init__(
        self,
        index: int,
        prediction: SentencePrediction,
        sentence: TaggedSentence,
        *args,
        **kwargs
    ):
        super().__init__(*args, **kwargs)
        self.index = index
        self.prediction = prediction
        self.sentence = sentence

    def compose(self) -> ComposeResult:
        verdict = "exact" if self.prediction.correct else "mismatch"
        yield HeaderBar(
            heading=f"Sentence {self.index + 1}",
            subtitle=f"lines {self.sentence.first_line}-{self.sentence.last_line}",
            status=verdict,
            id="header",
        )

        with Container(id="main-content"):
            yield Static(self._pair_summary(), id="pair-summary")
            yield DataTable(id="token-table")

        yield FooterBar(shortcuts="F1=Help, Esc=Back", id="status-bar")

    def _pair_summary(self) -> str:
        return (
            f"Gold: {format_pair_list(self.prediction.gold_pairs)}\n"
            f"Pred: {format_pair_list(self.prediction.pairs)}\n"
        )

    def on_mount(self) -> None:
        table = self.query_one("#token-table", DataTable)
        table.add_columns(*TOKEN_COLUMNS)
        table.cursor_type = "row"
        table.zebra_stripes = True
        for row in token_rows(self.prediction, self.sentence):
            table.add_row(*row)
        table.focus()

    def action_go_back(self) -> None:
        self.app.pop_screen()

    def action_show_help(self) -> None:
        self.app.push_screen("help", {"context": "tokens"})
