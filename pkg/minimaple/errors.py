"""Source positions, diagnostics and the exception hierarchy shared by every stage."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


JSON_SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """A 1-based position inside a source file plus a character count."""

    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self.line}:{self.column}+{self.length}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"

    def to_dict(self) -> dict:
        return {
            'file': self.file,
            'line': self.line,
            'column': self.column,
            'length': self.length,
        }


NO_SPAN = SourceSpan('<none>', 1, 1, 0)


class Severity(Enum):
    ERROR = 'error'
    WARNING = 'warning'
    INFO = 'info'


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan = NO_SPAN

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self):
        return (self.span.file, self.span.line, self.span.column, self.code)

    def format(self) -> str:
        """Human-readable form: file:line:col: severity[code]: message"""
        return f"{self.span}: {self.severity.value}[{self.code}]: {self.message}"

    def to_dict(self) -> dict:
        return {
            'schema': JSON_SCHEMA_VERSION,
            'severity': self.severity.value,
            'code': self.code,
            'message': self.message,
            'span': self.span.to_dict(),
        }


def error(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def warning(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span)


def info(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.INFO, code, message, span)


class MapleError(Exception):
    """Base class for all toolchain errors."""


class LexError(MapleError):
    """Raised when the lexer meets an illegal or unterminated token."""

    def __init__(self, message: str, span: SourceSpan) -> None:
        super().__init__(message)
        self.message = message
        self.span = span

    def to_diagnostic(self) -> Diagnostic:
        return error('lex', self.message, self.span)


class ParseError(MapleError):
    """Raised for one syntax error; the parser catches it and resynchronizes."""

    def __init__(self, message: str, span: SourceSpan) -> None:
        super().__init__(message)
        self.message = message
        self.span = span

    def to_diagnostic(self) -> Diagnostic:
        return error('syntax', self.message, self.span)


class ParseFailure(MapleError):
    """Raised once parsing is over and at least one syntax error was collected."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__(f"Parsing failed with {len(diagnostics)} error(s).")


class TypeResolutionError(MapleError):
    """Unknown type name or a cycle between named type definitions."""


class CheckerFault(MapleError):
    """An internal precondition of the type algebra was violated."""


class ExecutionError(MapleError):
    """A runtime error; the interpreter turns it into an absorbing error state."""

    def __init__(self, message: str, label: str | None = None, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.label = label
        self.span = span

    def to_diagnostic(self) -> Diagnostic:
        text = self.message if self.label is None else f"{self.message}: {self.label}"
        return error('runtime', text, self.span or NO_SPAN)


class RaisedError(ExecutionError):
    """Raised by an `error` command; the only kind an exception clause speaks about."""
