"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes (validation 1, resource 2, numeric 3),
and the service maps them onto HTTP statuses (400, 413, 500).
"""

from __future__ import annotations

from dataclasses import dataclass


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


@dataclass(frozen=True)
class Diagnostic:
    """One located problem found in a QML document."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ValidationError(SimulationError):
    """A QML document or job tree failed parsing or schema validation."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics[:5])
        if len(self.diagnostics) > 5:
            summary += f"; … ({len(self.diagnostics)} total)"
        super().__init__(summary or "invalid document")


class ResourceLimitError(SimulationError):
    """A job exceeds a configured resource cap.

    ``required_bytes`` carries the estimate so callers can report it.
    """

    def __init__(self, message: str, required_bytes: int | None = None):
        super().__init__(message)
        self.required_bytes = required_bytes


class NumericError(SimulationError):
    """A numeric contract was violated (non-unitary input, norm drift,
    impossible measurement outcome, non-convergence treated as fatal)."""
