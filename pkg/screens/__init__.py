"""Screen modules for the prediction inspector."""

from .sentences import SentenceListScreen
from .tokens import TokenDetailScreen
from .help import HelpScreen

__all__ = [
    "SentenceListScreen",
    "TokenDetailScreen",
    "HelpScreen",
]
