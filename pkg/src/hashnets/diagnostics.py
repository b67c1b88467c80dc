"""Source positions and diagnostics shared by the front end and the CLI.

Diagnostics render as ``file:line:col: severity: message`` so editors and CI
logs can link straight to the offending span.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """Half-open source region; line and col are 1-based."""

    line: int = 0
    col: int = 0
    end_line: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: Span = Span()
    file: str = "<input>"

    def render(self) -> str:
        return f"{self.file}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


class AhclError(Exception):
    """Base class for everything the toolchain raises on bad input."""


class AhclSyntaxError(AhclError):
    """Parse failure; carries the failure position and the expected tokens."""

    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = (), file: str = "<input>"):
        self.span = span
        self.expected = expected
        self.file = file
        super().__init__(f"{file}:{span.line}:{span.col}: error: {message}")


class DuplicateIdentifier(AhclError):
    def __init__(self, ident: str, span: Span, file: str = "<input>"):
        self.ident = ident
        self.span = span
        super().__init__(f"{file}:{span.line}:{span.col}: error: duplicate identifier '{ident}'")


@dataclass
class ValidationReport:
    """All violations found in one pass; ok() when nothing is an error."""

    diagnostics: list[Diagnostic] = field(default_factory=list)

    def add(self, severity: str, message: str, span: Span = Span(), file: str = "<input>") -> None:
        self.diagnostics.append(Diagnostic(severity, message, span, file))

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]

    def ok(self) -> bool:
        return not self.errors

    def render(self) -> str:
        return "\n".join(d.render() for d in self.diagnostics)
