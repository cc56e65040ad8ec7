"""
Shared widgets for the prediction inspector.
"""

from textual.reactive import reactive
from textual.widgets import Static


class HeaderBar(Static):
    """
    Two-line header: source name left, title centered, status right,
    with the subtitle centered underneath.
    """

    DEFAULT_CSS = """
    HeaderBar {
        height: 2;
        width: 100%;
        dock: top;
        background: $primary;
        color: $text;
        text-style: bold;
    }
    """

    status = reactive("")

    def __init__(
        self,
        heading: str = "PREDICTIONS",
        subtitle: str = "",
        source: str = "",
        status: str = "",
        *args,
        **kwargs
    ):
        super().__init__(*args, **kwargs)
        self.heading = heading.upper()
        self.subtitle = subtitle
        self.source = source
        self.set_reactive(HeaderBar.status, status)

    def on_mount(self) -> None:
        self._refresh_display()

    def on_resize(self, event) -> None:
        """Re-render when resized."""
        self._refresh_display()

    def watch_status(self, status: str) -> None:
        self._refresh_display()

    def _refresh_display(self) -> None:
        width = self.size.width if self.size.width > 0 else 80

        left = self.source
        center = self.heading
        right = self.status

        total_space = width - len(left) - len(center) - len(right)
        if total_space >= 2:
            left_space = (width - len(center)) // 2 - len(left)
            right_space = width - len(left) - left_space - len(center) - len(right)
            line1 = f"{left}{' ' * max(1, left_space)}{center}{' ' * max(1, right_space)}{right}"
        else:
            # Narrow screen
            line1 = f"{left} {center} {right}"

        line2 = self.subtitle.center(width)
        self.update(f"{line1}\n{line2}")


class FooterBar(Static):
    """
    Footer/status bar with the active key shortcuts.
    """

    DEFAULT_CSS = """
    FooterBar {
        height: 1;
        width: 100%;
        dock: bottom;
        background: $primary;
        color: $text;
        text-style: bold;
        padding: 0 1;
    }
    """

    def __init__(self, shortcuts: str = "", *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.shortcuts = shortcuts

    def on_mount(self) -> None:
        self.update(self.shortcuts)

    def set_shortcuts(self, shortcuts: str) -> None:
        self.shortcuts = shortcuts
        self.update(self.shortcuts)
