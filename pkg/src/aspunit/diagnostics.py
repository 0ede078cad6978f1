from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    origin: str = ""
    line: int = 0
    column: int = 0

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self):
        where = self.origin or "<input>"
        if self.line:
            where += f":{self.line}"
            if self.column:
                where += f":{self.column}"
        return f"{where}: {self.severity}: {self.message}"


def error(message: str, origin: str = "", line: int = 0, column: int = 0) -> ParseDiagnostic:
    return ParseDiagnostic("error", message, origin, line, column)


def warning(message: str, origin: str = "", line: int = 0, column: int = 0) -> ParseDiagnostic:
    return ParseDiagnostic("warning", message, origin, line, column)


class DiagnosticError(Exception):
    """Raised when input cannot be turned into a value; carries every diagnostic found."""

    def __init__(self, diagnostics: Iterable[ParseDiagnostic]):
        self.diagnostics: List[ParseDiagnostic] = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def errors(self) -> List[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.is_error]
