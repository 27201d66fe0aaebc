"""Exception hierarchy shared by every module.

Each exception carries a stable ``code`` string so the command line can emit
machine-parseable diagnostics without string matching on messages.
"""

from __future__ import annotations

from typing import Any


class GenWreathError(Exception):
    code = "error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def diagnostic(self) -> dict[str, Any]:
        out: dict[str, Any] = {"error": self.code, "message": self.message}
        for key, value in self.details.items():
            out[key] = str(value) if isinstance(value, int) and abs(value) > 2**53 else value
        return out


class ValidationError(GenWreathError, ValueError):
    """Malformed input: bad poset, bad table, bad cycle text, bad tree."""

    code = "invalid-input"


class CapExceeded(GenWreathError):
    """A size guard or resource budget would be exceeded."""

    code = "cap-exceeded"


class WellDefinednessViolation(GenWreathError):
    """A permutation fails to induce a map on equivalence classes."""

    code = "not-well-defined"
