"""Exception types with a stable mapping onto CLI exit codes."""

from __future__ import annotations


class InstrackError(Exception):
    """Base class for all toolkit errors (CLI exit code 1 unless refined below)."""


class ValidationError(InstrackError):
    """A value violates a documented invariant (exit code 2)."""


class ParseError(InstrackError):
    """A text record could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LoadError(InstrackError):
    """A benchmark directory or required file is missing or unreadable."""


class ConsistencyError(InstrackError):
    """Cross-file references do not line up (e.g. gt names a frame path.txt lacks)."""


class SequencingError(InstrackError):
    """Frames were fed to an online component out of order."""


class ProtocolError(InstrackError):
    """The external propagator channel violated the line protocol."""


class EmptyEvaluationError(InstrackError):
    """No instruction survived evaluation exclusions (exit code 3)."""
