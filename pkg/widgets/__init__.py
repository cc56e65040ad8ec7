"""Shared widgets for the prediction inspector."""

from .header import HeaderBar, FooterBar

__all__ = ["HeaderBar", "FooterBar"]
