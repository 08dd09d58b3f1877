"""Exceptions shared across the engine."""

from .concepts import ParseError, UndeclaredIdentifier


class ResourceLimitError(RuntimeError):
    """A configured search cap (branches, assignments) was exceeded."""


class EngineDefect(RuntimeError):
    """An internal invariant failed; this indicates a bug, not an answer."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


__all__ = ["ParseError", "UndeclaredIdentifier", "ResourceLimitError", "EngineDefect"]
