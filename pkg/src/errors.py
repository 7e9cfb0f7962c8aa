"""
Error types raised across the toolkit.

All errors derive from ``TableTitleError`` (itself a ``ValueError``) so callers
can catch toolkit failures in one place while plain validation code keeps
working with ``ValueError``.
"""

from typing import Optional


class TableTitleError(ValueError):
    """Base class for all toolkit errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class EmptyDocument(TableTitleError):
    """HTML input was empty."""


class EmptyCandidates(TableTitleError):
    """Title aggregation was given no candidates."""


class EmptyCorpus(TableTitleError):
    """Vocabulary construction was given no records."""


class TooFewRecords(TableTitleError):
    """Dataset split needs at least ten records."""


class InvalidId(TableTitleError):
    """Token id outside the extended vocabulary of an example."""


class EmptySource(TableTitleError):
    """Encoder was given an empty source sequence."""


class AllMasked(TableTitleError):
    """Attention was asked to normalise over zero unmasked positions."""


class ShapeError(TableTitleError):
    """Array shapes do not agree."""


class NonFiniteGradient(TableTitleError):
    """A gradient contained NaN or infinity; the update was aborted."""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class DeadEnd(TableTitleError):
    """Every token of a decode step was masked out."""


class EmptyInput(TableTitleError):
    """A table context linearized to zero tokens."""


class LengthMismatch(TableTitleError):
    """Predictions and references have different lengths."""


class CheckpointFormatError(TableTitleError):
    """Checkpoint file is truncated, has bad magic bytes or an unknown version."""


class ConfigError(TableTitleError):
    """Configuration file or value is invalid."""
