"""Cell gates, the aggregate project validator and matrix traversal."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .analysis import check_strategy_coverage, validate_motivations, validate_solutions
from .bpmn_io import export_bpmn, validate_bpmn_schema
from .consistency import run_rules
from .crud import check_cruda_completeness, derive_cruda
from .diagnostics import Diagnostic, apply_waivers, error, has_errors, sort_diagnostics
from .errors import PreconditionError
from .matrix import ALL_CELLS, MODEL_STAGES, CellId, Done, DoneType, Layer, Stage
from .opaal import validate_lexicon
from .process import Maturity, check_executable, validate_structure
from .project import Project
from .simulate import SimConfig, SimOutcome, explore
from .transition import validate_inventory, validate_migration_plan, validate_platform

log = logging.getLogger(__name__)


class CellState(Enum):
    EMPTY = "Empty"
    DRAFT = "Draft"
    READY = "Ready"


@dataclass(frozen=True)
class CellStatus:
    cell: CellId
    state: CellState
    diagnostics: tuple[Diagnostic, ...] = ()

    def to_dict(self) -> dict:
        return {
            "cell": str(self.cell),
            "state": self.state.value,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def validate_project(project: Project) -> list[Diagnostic]:
    """Every validator over the loaded snapshot, waivers applied.

    Gate checklists are not included; see cell_status.
    """
    diagnostics = list(project.load_diagnostics)

    for stage, lex in sorted(project.lexicons.items()):
        involved: set[str] = set()
        for model in project.models_for(stage):
            involved |= model.names_used()
        diagnostics.extend(validate_lexicon(lex, project.settings, involved))

    analysis = project.analysis
    if analysis.motivations is not None:
        diagnostics.extend(validate_motivations(analysis.motivations))
        if analysis.strategies is not None:
            diagnostics.extend(check_strategy_coverage(analysis.motivations, analysis.strategies))
    if analysis.solutions is not None:
        diagnostics.extend(validate_solutions(analysis.solutions))

    for cell, model in sorted(project.processes.items()):
        diagnostics.extend(validate_structure(model))
        if model.maturity is Maturity.PSM:
            diagnostics.extend(check_executable(model))
        if cell.stage not in project.lexicons:
            diagnostics.append(
                error("PROJ-NO-LEXICON", cell, model.subject,
                      f"no {cell.stage.label} lexicon to check the model against")
            )

    for stage in MODEL_STAGES:
        model = project.pim_model(stage)
        lex = project.lexicons.get(stage)
        if model is not None and lex is not None:
            # Unknown objects are reported once, by R4
            matrix, _unknown = derive_cruda([model], lex)
            diagnostics.extend(check_cruda_completeness(matrix))

    if project.inventory is not None:
        diagnostics.extend(validate_inventory(project.inventory))
    if project.platform is not None:
        diagnostics.extend(validate_platform(project.platform))
    if project.migration is not None:
        diagnostics.extend(
            validate_migration_plan(
                project.migration, project.inventory or (), project.lexicons.get(Stage.TOBE)
            )
        )

    diagnostics.extend(run_rules(project))
    return apply_waivers(diagnostics, project.settings.waivers)


@dataclass(frozen=True)
class GateContext:
    project: Project
    sim_config: SimConfig
    schema_path: Path | None


# A gate returns (item, message) for every unmet checklist item
Gate = Callable[[GateContext], list[tuple[str, str]]]


def _cim_asis(ctx: GateContext) -> list[tuple[str, str]]:
    p = ctx.project
    missing = []
    if not p.narratives.get(Stage.ASIS, "").strip():
        missing.append(("NARRATIVE", "AsIs narrative is missing"))
    if Stage.ASIS not in p.lexicons:
        missing.append(("LEXICON", "AsIs OPAAL lexicon is missing"))
    if not p.analysis.motivations:
        missing.append(("PROBLEMS", "no problem or desire recorded"))
    return missing


def _cim_transformation(ctx: GateContext) -> list[tuple[str, str]]:
    a = ctx.project.analysis
    missing = []
    if a.statement is None or not a.statement.text.strip():
        missing.append(("STATEMENT", "innovation statement is missing"))
    if not a.strategies:
        missing.append(("STRATEGIES", "no innovation strategy recorded"))
    if not any(s.pros and s.cons for s in a.solutions or ()):
        missing.append(("SOLUTIONS", "no solution with both pros and cons"))
    if a.selected is None:
        missing.append(("SELECTION", "exactly one solution must be selected"))
    return missing


def _signoff(project: Project, attr: str, label: str) -> list[tuple[str, str]]:
    if not project.actors_registry:
        return [("SIGNOFF", "actors registry is empty")]
    pending = [a.name for a in project.actors_registry if not getattr(a, attr)]
    if pending:
        return [("SIGNOFF", f"{label} validation pending for: {', '.join(pending)}")]
    return []


def _cim_tobe(ctx: GateContext) -> list[tuple[str, str]]:
    p = ctx.project
    missing = []
    if not p.narratives.get(Stage.TOBE, "").strip():
        missing.append(("NARRATIVE", "ToBe narrative is missing"))
    if Stage.TOBE not in p.lexicons:
        missing.append(("LEXICON", "ToBe OPAAL lexicon is missing"))
    return missing + _signoff(p, "signed_off", "ToBe scenario")


def _pim_asis(ctx: GateContext) -> list[tuple[str, str]]:
    if ctx.project.pim_model(Stage.ASIS) is None:
        return [("PROCESS", "AsIs process model is missing")]
    return []


def _pim_transformation(ctx: GateContext) -> list[tuple[str, str]]:
    notes = ctx.project.notes
    missing = []
    if notes is None or not notes.guidelines:
        missing.append(("GUIDELINES", "no transformation guideline recorded"))
    if notes is None or not notes.units:
        missing.append(("UNITS", "no organizational unit recorded"))
    return missing


def _pim_tobe(ctx: GateContext) -> list[tuple[str, str]]:
    p = ctx.project
    missing = []
    if p.pim_model(Stage.TOBE) is None:
        missing.append(("PROCESS", "ToBe process model is missing"))
    if p.classes is None:
        missing.append(("CLASSES", "class skeleton is missing"))
    if p.use_cases is None:
        missing.append(("USECASES", "use cases are missing"))
    return missing + _signoff(p, "pim_signed_off", "ToBe model")


def _psm_asis(ctx: GateContext) -> list[tuple[str, str]]:
    if not ctx.project.inventory:
        return [("INVENTORY", "legacy data inventory is empty")]
    return []


def _psm_transformation(ctx: GateContext) -> list[tuple[str, str]]:
    p = ctx.project
    missing = []
    if p.platform is None:
        missing.append(("PLATFORM", "no platform choice recorded"))
    if p.migration is None:
        missing.append(("MIGRATION", "migration plan is missing"))
    return missing


def _psm_tobe(ctx: GateContext) -> list[tuple[str, str]]:
    model = ctx.project.processes.get(CellId(Layer.PSM, Stage.TOBE))
    if model is None:
        return [("PROCESS", "ToBe PSM model is missing")]
    missing = []
    try:
        errors = validate_bpmn_schema(export_bpmn(model), ctx.schema_path)
        if errors:
            missing.append(("EXPORT", f"exported BPMN is not schema-valid: {errors[0]}"))
    except (PreconditionError, ValueError) as e:
        missing.append(("EXPORT", str(e)))
    try:
        report = explore(model, ctx.sim_config)
        if report.outcome is not SimOutcome.PROPER_COMPLETION:
            missing.append(("SIMULATION", f"exhaustive simulation ended in {report.outcome.value}"))
    except PreconditionError as e:
        missing.append(("SIMULATION", str(e)))
    return missing


GATES: dict[CellId, Gate] = {
    CellId(Layer.CIM, Stage.ASIS): _cim_asis,
    CellId(Layer.CIM, Stage.TRANSFORMATION): _cim_transformation,
    CellId(Layer.CIM, Stage.TOBE): _cim_tobe,
    CellId(Layer.PIM, Stage.ASIS): _pim_asis,
    CellId(Layer.PIM, Stage.TRANSFORMATION): _pim_transformation,
    CellId(Layer.PIM, Stage.TOBE): _pim_tobe,
    CellId(Layer.PSM, Stage.ASIS): _psm_asis,
    CellId(Layer.PSM, Stage.TRANSFORMATION): _psm_transformation,
    CellId(Layer.PSM, Stage.TOBE): _psm_tobe,
}


def cell_status(
    project: Project,
    cell: CellId,
    diagnostics: list[Diagnostic] | None = None,
    sim_config: SimConfig | None = None,
    schema_path: Path | None = None,
) -> CellStatus:
    """Evaluate one cell's gate checklist plus the findings bound to it.

    Args:
        project: Loaded snapshot.
        cell: Cell to evaluate.
        diagnostics: Precomputed validate_project output, to share one
            validation run across the nine cells.
        sim_config: Bound for the PSM-ToBe simulation item.
        schema_path: BPMN XSD for the PSM-ToBe export item.
    """
    if not project.artifacts(cell):
        return CellStatus(cell, CellState.EMPTY)
    if diagnostics is None:
        diagnostics = validate_project(project)
    found = [d for d in diagnostics if d.cell == cell]
    ctx = GateContext(project, sim_config or SimConfig(), schema_path)
    for item, message in GATES[cell](ctx):
        found.append(error(f"GATE-{cell}-{item}", cell, cell.path, message))
    found = sort_diagnostics(found)
    state = CellState.DRAFT if has_errors(found) else CellState.READY
    log.debug(f"{cell}: {state.value} ({len(found)} diagnostics)")
    return CellStatus(cell, state, tuple(found))


def matrix_status(
    project: Project, sim_config: SimConfig | None = None, schema_path: Path | None = None
) -> list[CellStatus]:
    """All nine cells in row-major order."""
    diagnostics = validate_project(project)
    return [cell_status(project, cell, diagnostics, sim_config, schema_path) for cell in ALL_CELLS]


def next_step(
    project: Project, statuses: list[CellStatus] | None = None
) -> CellId | DoneType:
    """First cell in row-major order that is not Ready; advisory only."""
    for status in statuses or matrix_status(project):
        if status.state is not CellState.READY:
            return status.cell
    return Done


def render_matrix(statuses: list[CellStatus], step: CellId | DoneType) -> str:
    by_cell = {s.cell: s for s in statuses}
    header = ["", *(stage.label for stage in Stage)]
    rows = [
        [layer.name, *(by_cell[CellId(layer, stage)].state.value for stage in Stage)]
        for layer in Layer
    ]
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths, strict=True)).rstrip() for r in [header, *rows]]
    lines.append(f"Next step: {step}")
    return "\n".join(lines) + "\n"
