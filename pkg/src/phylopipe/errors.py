"""Exception types shared across the workflow."""

from __future__ import annotations

import enum


class ErrorKind(str, enum.Enum):
    NO_COMMAND = "NoCommand"
    INVALID_COMMAND = "InvalidCommand"
    MISSING_TYPE = "MissingType"
    INVALID_TYPE = "InvalidType"
    REPEATED_COMMAND = "RepeatedCommand"
    MISSING_INPUT = "MissingInput"
    PARSE_FAILURE = "ParseFailure"
    IO_FAILURE = "IoFailure"


class WorkflowError(Exception):
    """A user-facing failure of the command line workflow.

    ``kind`` identifies which rule was broken; ``detail`` is the message
    shown to the user.
    """

    def __init__(self, kind: ErrorKind, detail: str):
        super().__init__(f"{kind.value}: {detail}")
        self.kind = kind
        self.detail = detail


class ParseError(WorkflowError, ValueError):
    """Malformed file content (datasets, matrices, trees)."""

    def __init__(self, detail: str):
        super().__init__(ErrorKind.PARSE_FAILURE, detail)


class DataError(ValueError):
    """Input data that is well formed but unusable by an operation."""


class DomainError(DataError, ArithmeticError):
    """A distance formula was evaluated outside of its domain."""
