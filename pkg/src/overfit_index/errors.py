"""Exception types shared across the package.

Every error raised by this package derives from OverfitIndexError, so
callers can catch one base class.  Parsing errors carry 1-based source
locations for diagnostics; validation errors name the offending field.
"""

from __future__ import annotations


class OverfitIndexError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OverfitIndexError, ValueError):
    """A record, run, spec, or argument violates a documented invariant."""

    def __init__(self, message: str, *, field: str | None = None,
                 line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.field = field
        self.line = line


class SequencingError(OverfitIndexError, ValueError):
    """An epoch arrived out of order during incremental accumulation."""

    def __init__(self, expected: int, received: int, *,
                 line: int | None = None):
        message = f"out-of-order epoch: expected {expected}, received {received}"
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.expected = expected
        self.received = received
        self.line = line


class ParseError(OverfitIndexError, ValueError):
    """Input text could not be decoded as a record."""

    def __init__(self, message: str, *, line: int | None = None,
                 column: str | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(OverfitIndexError, ValueError):
    """A required field or column is missing from the input."""

    def __init__(self, message: str, *, key: str | None = None,
                 line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.key = key
        self.line = line


class DuplicateEpochError(OverfitIndexError, ValueError):
    """Two input records carry the same source epoch label."""

    def __init__(self, epoch: int, *, line: int | None = None):
        message = f"duplicate epoch {epoch} in input"
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.epoch = epoch
        self.line = line
