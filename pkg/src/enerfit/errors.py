"""Shared error base so the CLI and HTTP layer can map failures uniformly.

Every module-level failure subclasses EnerfitError and carries a short
machine-readable ``code`` plus an optional offending ``field`` name.
"""

from __future__ import annotations


class EnerfitError(Exception):
    code = "Error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        if self.field is not None:
            out["field"] = self.field
        return out
