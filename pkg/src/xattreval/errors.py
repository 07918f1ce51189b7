"""Exception hierarchy for the toolkit.

Every error raised on purpose derives from :class:`ToolkitError` so callers
(and the CLI) can separate our diagnostics from genuine bugs.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ToolkitError):
    """A domain-type invariant was violated; message names the field path."""


class SchemaError(ToolkitError):
    """A file did not match its documented schema."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}: "
        super().__init__(f"{prefix}{message}")


class ConfigurationError(ToolkitError):
    """Missing or inconsistent configuration (lexicon, endpoint, template, ...)."""


class UndefinedMetricError(ToolkitError):
    """The metric has no defined value on this input (e.g. empty stratum).

    Reported as an absent value, never silently coerced to 0.
    """


class TransportError(ToolkitError):
    """A remote call failed after bounded retries."""

    def __init__(self, message: str, attempts: int = 1):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")


class ProtocolError(ToolkitError):
    """The remote service replied, but not in the documented wire format."""


class ScoreRangeError(ProtocolError):
    """The remote service returned a numeric score outside [0, 1]."""


class BatchScoringError(ToolkitError):
    """One or more items of a batch failed; the rest of the batch is preserved.

    ``scores`` maps batch index -> valid score, ``errors`` maps batch
    index -> the per-item error. Failures are per item, never per batch.
    """

    def __init__(self, scores: dict[int, float], errors: dict[int, Exception]):
        self.scores = scores
        self.errors = errors
        summary = "; ".join(f"item {i}: {e}" for i, e in sorted(errors.items()))
        super().__init__(f"{len(errors)} of {len(scores) + len(errors)} batch items failed: {summary}")


class UnrepresentableProportionError(ToolkitError):
    """A synthetic-fixture target proportion is not an exact count at the chosen size."""


class InsufficientPoolError(ToolkitError):
    """The few-shot exemplar pool lacks a required (label, passage-language) cell."""
