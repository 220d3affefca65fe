"""Exception types shared across the toolkit.

All domain errors derive from LabelShiftError so the CLI can map them to
exit code 1; usage and I/O problems are reported separately with exit
code 2.
"""

from __future__ import annotations


class LabelShiftError(Exception):
    """Base class for every toolkit error."""


class ParseError(LabelShiftError):
    """A corpus, embedding, or stats file could not be parsed."""

    def __init__(self, message: str, source: str = "", line: int | None = None):
        location = source or "<stream>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")
        self.source = source
        self.line = line


class EmbeddingError(LabelShiftError):
    """A label could not be mapped to a vector."""


class RemoteError(EmbeddingError):
    """The remote embedding service failed or violated the protocol."""


class DegenerateInputError(LabelShiftError):
    """An operation received input on which its result is undefined."""
