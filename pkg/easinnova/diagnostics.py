"""Diagnostics: the uniform output of every validator."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, replace
from enum import Enum

from .matrix import CellId


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


@dataclass(frozen=True)
class Diagnostic:
    """A coded finding bound to a matrix cell and a subject path."""

    code: str
    severity: Severity
    cell: CellId
    subject: str
    message: str

    @property
    def sort_key(self) -> tuple:
        return (self.cell, self.code, self.subject, self.message)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self) -> str:
        return f"{self.severity.name} {self.code} {self.subject}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "cell": str(self.cell),
            "subject": self.subject,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Diagnostic:
        return cls(
            code=data["code"],
            severity=Severity(data["severity"]),
            cell=CellId.parse(data["cell"]),
            subject=data["subject"],
            message=data["message"],
        )


def error(code: str, cell: CellId, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, cell, subject, message)


def warning(code: str, cell: CellId, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, cell, subject, message)


def info(code: str, cell: CellId, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, Severity.INFO, cell, subject, message)


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Deduplicate and order by (cell, code, subject, message)."""
    return sorted(set(diagnostics), key=lambda d: d.sort_key)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


@dataclass(frozen=True)
class Waiver:
    """An acknowledged finding, downgraded to a warning."""

    code: str
    subject: str
    reason: str

    def to_dict(self) -> dict:
        return {"code": self.code, "subject": self.subject, "reason": self.reason}


def apply_waivers(
    diagnostics: Iterable[Diagnostic], waivers: Iterable[Waiver]
) -> list[Diagnostic]:
    """Downgrade diagnostics matching a waiver on (code, subject).

    Args:
        diagnostics: Findings to filter.
        waivers: Project waivers.

    Returns:
        Sorted diagnostics with waived ones reported as warnings.
    """
    by_key = {(w.code, w.subject): w for w in waivers}
    result = []
    for diag in diagnostics:
        waiver = by_key.get((diag.code, diag.subject))
        if waiver is not None and diag.severity is not Severity.INFO:
            diag = replace(
                diag,
                severity=Severity.WARNING,
                message=f"{diag.message} (waived: {waiver.reason})",
            )
        result.append(diag)
    return sort_diagnostics(result)


def render_text(diagnostics: Iterable[Diagnostic]) -> str:
    lines = [d.render() for d in diagnostics]
    return "\n".join(lines) + ("\n" if lines else "")


def render_json(diagnostics: Iterable[Diagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diagnostics], indent=2, ensure_ascii=False) + "\n"
