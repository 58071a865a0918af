"""Diagnostics and exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """One validation or parse finding. ``severity`` is ``error`` or ``warning``."""

    severity: str
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.code} {self.location}: {self.message}"


class VoxsimError(Exception):
    """Base class for all package errors."""


class ParseError(VoxsimError):
    """Raised by the input parsers; always carries at least one diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic]):
        if not diagnostics:
            diagnostics = [Diagnostic("error", "ParseFailure", "", "unspecified parse failure")]
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))

    @classmethod
    def single(cls, code: str, location: str, message: str) -> "ParseError":
        return cls([Diagnostic("error", code, location, message)])


class ModelInvalid(VoxsimError):
    """Model failed validation; carries the full diagnostic list."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics if d.severity == "error"))


class UnknownLocation(VoxsimError):
    pass


class UnknownAgentType(VoxsimError):
    pass


class InsufficientItems(VoxsimError):
    pass


class IllegalTransition(VoxsimError):
    pass


class Unreachable(VoxsimError):
    """No free adjacent cell, or no path over unblocked cells."""


class SerializationError(VoxsimError):
    pass


class EmptyEventList(VoxsimError):
    pass


class SafetyCapReached(VoxsimError):
    pass
