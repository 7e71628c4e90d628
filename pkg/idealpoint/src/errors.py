"""Typed errors shared by the library and the command-line frontend."""

from __future__ import annotations


class IdealPointError(Exception):
    """Base error carrying a user-facing detail, a stable code and an exit status."""

    code = "RUNTIME_ERROR"
    exit_code = 1

    def __init__(self, detail: str, *, code: str | None = None, exit_code: int | None = None) -> None:
        self.detail = detail
        if code is not None:
            self.code = code
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(detail)


class ParseError(IdealPointError):
    """Raised when an input file cannot be parsed; carries the offending position."""

    code = "PARSE_ERROR"
    exit_code = 2

    def __init__(self, detail: str, *, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            detail = f"{detail} ({', '.join(location)})"
        super().__init__(detail)


class ValidationError(IdealPointError):
    code = "VALIDATION_ERROR"
    exit_code = 2


class DegenerateDataError(IdealPointError):
    code = "DEGENERATE_DATA"
    exit_code = 2


class DomainError(IdealPointError):
    code = "DOMAIN_ERROR"
    exit_code = 2


class UnsupportedOperationError(IdealPointError):
    code = "UNSUPPORTED_OPERATION"
    exit_code = 2


class LinearAlgebraError(IdealPointError):
    code = "LINEAR_ALGEBRA_ERROR"
    exit_code = 1
