"""CIM-Transformation knowledge: motivations, strategies and solutions."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum

from .diagnostics import Diagnostic, error, sort_diagnostics, warning
from .errors import PreconditionError
from .matrix import CellId, Layer, Stage

log = logging.getLogger(__name__)

CELL = CellId(Layer.CIM, Stage.TRANSFORMATION)


class MotivationKind(Enum):
    PROBLEM = "Problem"
    DESIRE = "Desire"


@dataclass(frozen=True)
class MotivationRecord:
    label: str
    kind: MotivationKind
    description: str

    def to_dict(self) -> dict:
        return {"label": self.label, "kind": self.kind.value, "description": self.description}

    @classmethod
    def from_dict(cls, data: dict) -> MotivationRecord:
        return cls(data["label"], MotivationKind(data["kind"]), data["description"])


@dataclass(frozen=True)
class InnovationStatement:
    text: str


@dataclass(frozen=True)
class StrategyRecord:
    motivation_label: str
    strategy: str

    def to_dict(self) -> dict:
        return {"motivation_label": self.motivation_label, "strategy": self.strategy}

    @classmethod
    def from_dict(cls, data: dict) -> StrategyRecord:
        return cls(data["motivation_label"], data["strategy"])


@dataclass(frozen=True)
class SolutionRecord:
    label: str
    description: str
    pros: tuple[str, ...] = ()
    cons: tuple[str, ...] = ()
    mitigations: tuple[str, ...] = ()
    selected: bool = False

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "description": self.description,
            "pros": list(self.pros),
            "cons": list(self.cons),
            "mitigations": list(self.mitigations),
            "selected": self.selected,
        }

    @classmethod
    def from_dict(cls, data: dict) -> SolutionRecord:
        return cls(
            label=data["label"],
            description=data["description"],
            pros=tuple(data.get("pros", [])),
            cons=tuple(data.get("cons", [])),
            mitigations=tuple(data.get("mitigations", [])),
            selected=data.get("selected", False),
        )


@dataclass(frozen=True)
class TransformationAnalysis:
    """Everything recorded in the CIM-Transformation cell."""

    motivations: tuple[MotivationRecord, ...] | None = None
    statement: InnovationStatement | None = None
    strategies: tuple[StrategyRecord, ...] | None = None
    solutions: tuple[SolutionRecord, ...] | None = None

    @property
    def selected(self) -> SolutionRecord | None:
        chosen = [s for s in self.solutions or () if s.selected]
        return chosen[0] if len(chosen) == 1 else None


def _subject(kind: str, label: str) -> str:
    return f"{CELL.path}/{kind}#{label}"


def validate_motivations(records: list[MotivationRecord] | tuple[MotivationRecord, ...]) -> list[Diagnostic]:
    """Labels must be unique and descriptions non-empty."""
    diagnostics = []
    counts = Counter(r.label for r in records)
    for label, count in counts.items():
        if count > 1:
            diagnostics.append(
                error("AN-DUP", CELL, _subject("motivations", label),
                      f"motivation label '{label}' used {count} times")
            )
    for record in records:
        if not record.description.strip():
            diagnostics.append(
                error("AN-EMPTY", CELL, _subject("motivations", record.label),
                      f"motivation '{record.label}' has an empty description")
            )
    return sort_diagnostics(diagnostics)


def check_strategy_coverage(
    motivations: list[MotivationRecord] | tuple[MotivationRecord, ...],
    strategies: list[StrategyRecord] | tuple[StrategyRecord, ...],
) -> list[Diagnostic]:
    """Bipartite check between motivations and strategies.

    Returns:
        One STRAT-UNCOVERED per motivation without a strategy and one
        STRAT-DANGLING per strategy whose motivation does not exist.
    """
    labels = {m.label for m in motivations}
    covered = {s.motivation_label for s in strategies}
    diagnostics = [
        error("STRAT-UNCOVERED", CELL, _subject("motivations", label),
              f"motivation '{label}' has no innovation strategy")
        for label in sorted(labels - covered)
    ]
    for index, strategy in enumerate(strategies):
        if strategy.motivation_label not in labels:
            diagnostics.append(
                error("STRAT-DANGLING", CELL, f"{CELL.path}/strategies#{index}",
                      f"strategy refers to unknown motivation '{strategy.motivation_label}'")
            )
    return sort_diagnostics(diagnostics)


def validate_solutions(solutions: list[SolutionRecord] | tuple[SolutionRecord, ...]) -> list[Diagnostic]:
    diagnostics = []
    counts = Counter(s.label for s in solutions)
    for label, count in counts.items():
        if count > 1:
            diagnostics.append(
                error("AN-DUP", CELL, _subject("solutions", label),
                      f"solution label '{label}' used {count} times")
            )
    selected = [s.label for s in solutions if s.selected]
    if len(selected) > 1:
        diagnostics.append(
            error("AN-MULTISELECT", CELL, f"{CELL.path}/solutions",
                  f"more than one solution selected: {', '.join(sorted(selected))}")
        )
    for solution in solutions:
        if not solution.description.strip():
            diagnostics.append(
                error("AN-EMPTY", CELL, _subject("solutions", solution.label),
                      f"solution '{solution.label}' has an empty description")
            )
        if not solution.cons:
            diagnostics.append(
                warning("AN-ONESIDED", CELL, _subject("solutions", solution.label),
                        f"solution '{solution.label}' lists no cons")
            )
    return sort_diagnostics(diagnostics)


def select_candidate(
    solutions: list[SolutionRecord] | tuple[SolutionRecord, ...], label: str
) -> list[SolutionRecord]:
    """Mark ``label`` as the candidate solution, clearing any other selection.

    Raises:
        PreconditionError: no solution carries ``label``.
    """
    if label not in {s.label for s in solutions}:
        raise PreconditionError(f"Unknown solution: {label}")
    log.info(f"Selecting candidate solution {label}")
    return [replace(s, selected=(s.label == label)) for s in solutions]
