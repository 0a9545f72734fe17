"""Exception hierarchy shared by every module."""
from typing import Any, Optional


class GroupoidError(Exception):
    """Root of all errors raised by this package."""


class StructureError(GroupoidError, ValueError):
    """Tables reference ids that do not exist, or have the wrong shape."""


class ParseError(StructureError):
    """A text block could not be read. Carries the file and line."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class Refusal(GroupoidError):
    """A mathematical precondition does not hold; `witness` names why."""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message if witness is None else f"{message} (witness: {witness})")


class SizeLimitError(GroupoidError):
    """A derived construction would exceed the configured size guardrail."""
