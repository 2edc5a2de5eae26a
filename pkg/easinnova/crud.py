"""CRUDA matrices derived from declared task effects."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error, sort_diagnostics, warning
from .matrix import CellId, Layer, Stage
from .opaal import Category, OpaalLexicon
from .process import CRUDA_OPS, ProcessModel


def _ordered(ops: Iterable[str]) -> str:
    return "".join(op for op in CRUDA_OPS if op in set(ops))


@dataclass(frozen=True)
class CrudaMatrix:
    """Process terms (rows) crossed with Object terms (columns)."""

    stage: Stage
    rows: tuple[str, ...] = ()
    columns: tuple[str, ...] = ()
    cells: dict[tuple[str, str], frozenset[str]] = field(default_factory=dict)

    @property
    def cell_id(self) -> CellId:
        return CellId(Layer.PIM, self.stage)

    def cell(self, row: str, column: str) -> frozenset[str]:
        return self.cells.get((row, column), frozenset())

    def column_ops(self, column: str) -> frozenset[str]:
        ops: set[str] = set()
        for row in self.rows:
            ops |= self.cell(row, column)
        return frozenset(ops)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.name,
            "columns": list(self.columns),
            "rows": [
                {
                    "process": row,
                    "cells": {c: _ordered(self.cell(row, c)) for c in self.columns if self.cell(row, c)},
                }
                for row in self.rows
            ],
        }

    def render(self) -> str:
        """Aligned text table; empty cells shown as '.'."""
        header = ["Process", *self.columns]
        body = [[row, *(_ordered(self.cell(row, c)) or "." for c in self.columns)] for row in self.rows]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths, strict=True)).rstrip() for r in [header, *body]]
        return "\n".join(lines) + "\n"


def derive_cruda(
    models: Iterable[ProcessModel], lex: OpaalLexicon
) -> tuple[CrudaMatrix, list[Diagnostic]]:
    """Aggregate task effects of one stage into a CRUDA matrix.

    Rows are task names that are Process terms; tasks with the same name
    in different pools share a row. Columns are all Object terms.

    Returns:
        The matrix, plus CRUD-UNKNOWN-OBJ for effects on undeclared objects.
    """
    cell = CellId(Layer.PIM, lex.stage)
    objects = lex.names(Category.OBJECT)
    processes = lex.names(Category.PROCESS)
    cells: dict[tuple[str, str], set[str]] = defaultdict(set)
    rows: set[str] = set()
    diagnostics = []

    for model in models:
        for _pool, node in model.tasks():
            in_lexicon = node.label in processes
            if in_lexicon:
                rows.add(node.label)
            for effect in node.effects:
                if effect.object not in objects:
                    diagnostics.append(
                        error("CRUD-UNKNOWN-OBJ", cell, f"{cell.path}/crud#{effect.object}",
                              f"task '{node.label}' acts on '{effect.object}', "
                              f"which is not a {lex.stage.label} Object term")
                    )
                elif in_lexicon:
                    cells[(node.label, effect.object)].add(effect.op)

    matrix = CrudaMatrix(
        stage=lex.stage,
        rows=tuple(sorted(rows)),
        columns=tuple(sorted(objects)),
        cells={key: frozenset(ops) for key, ops in cells.items()},
    )
    return matrix, sort_diagnostics(diagnostics)


def check_cruda_completeness(m: CrudaMatrix) -> list[Diagnostic]:
    """Every object is created, read once created, and eventually deleted or archived."""
    cell = m.cell_id
    diagnostics = []
    for column in m.columns:
        ops = m.column_ops(column)
        subject = f"{cell.path}/crud#{column}"
        if "C" not in ops:
            diagnostics.append(error("CRUD-NO-CREATE", cell, subject, f"no task creates '{column}'"))
        elif "R" not in ops:
            diagnostics.append(
                warning("CRUD-NO-READ", cell, subject, f"'{column}' is created but never read")
            )
        if "D" not in ops and "A" not in ops:
            diagnostics.append(
                warning("CRUD-NO-DA", cell, subject, f"'{column}' is never deleted or archived")
            )
    return sort_diagnostics(diagnostics)
