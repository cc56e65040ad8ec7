"""
Help Screen - Displays context-sensitive help for each screen.
"""

from textual.app import ComposeResult
from textual.binding import Binding
from textual.containers import ScrollableContainer
from textual.screen import Screen
from textual.widgets import Static

from utils.help_text import get_help_for_screen, get_help_title
from widgets import FooterBar, HeaderBar


class HelpScreen(Screen):
    """
    Help screen showing context-sensitive usage instructions.
    """

    BINDINGS = [
        Binding("escape", "go_back", "Back"),
        Binding("q", "go_back", "Back", show=False),
    ]

    def __init__(self, context: str = "sentences", *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.context = context

    def compose(self) -> ComposeResult:
        yield HeaderBar(heading="Help", subtitle=get_help_title(self.context), id="header")

        with ScrollableContainer(id="help-container"):
            yield Static(get_help_for_screen(self.context), id="help-text")

        yield FooterBar(shortcuts="Esc=Return to previous screen", id="status-bar")

    def action_go_back(self) -> None:
        self.app.pop_screen()
