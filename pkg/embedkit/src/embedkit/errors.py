"""Errors raised by the export/serve pipeline."""

from __future__ import annotations


class EmbedkitError(Exception):
    """Base class for this package's errors."""


class ModelLoadError(EmbedkitError):
    """The requested encoder could not be imported or its weights loaded."""


class ParseError(EmbedkitError):
    """An input document file failed to parse; message carries the line."""
