"""Cross-model consistency rules R1-R8.

Each stage's models are checked against that stage's lexicon only:
AsIs models against the AsIs lexicon, ToBe models against the ToBe one.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

from .diagnostics import Diagnostic, Severity, error, sort_diagnostics
from .matrix import CellId, Layer, Stage
from .opaal import Category, OpaalLexicon, validate_lexicon
from .process import ProcessModel
from .project import Project

log = logging.getLogger(__name__)

MODEL_CELLS = frozenset(
    {CellId(Layer.PIM, Stage.ASIS), CellId(Layer.PIM, Stage.TOBE), CellId(Layer.PSM, Stage.TOBE)}
)
LEXICON_CELLS = frozenset({CellId(Layer.CIM, Stage.ASIS), CellId(Layer.CIM, Stage.TOBE)})
PIM_TOBE = CellId(Layer.PIM, Stage.TOBE)


@dataclass(frozen=True)
class Rule:
    code: str
    description: str
    scope: frozenset[CellId]
    severity: Severity
    check: Callable[[Project], list[Diagnostic]]


def _model_pairs(project: Project) -> list[tuple[ProcessModel, OpaalLexicon]]:
    """Every process model with the lexicon of its stage."""
    pairs = []
    for cell in sorted(project.processes):
        lex = project.lexicons.get(cell.stage)
        if lex is not None:
            pairs.append((project.processes[cell], lex))
    return pairs


def _actor_names(project: Project, lex: OpaalLexicon) -> frozenset[str]:
    return lex.names(Category.ACTOR) | {project.enterprise}


def check_link_endpoints(project: Project) -> list[Diagnostic]:
    diagnostics = []
    for lex in project.lexicons.values():
        diagnostics.extend(d for d in validate_lexicon(lex, project.settings) if d.code == "R1")
    return diagnostics


def check_pool_actors(project: Project) -> list[Diagnostic]:
    diagnostics = []
    for model, lex in _model_pairs(project):
        actors = _actor_names(project, lex)
        for pool in model.pools:
            if pool.actor_name not in actors:
                diagnostics.append(
                    error("R2", model.cell, model.subject,
                          f"pool '{pool.name}' actor '{pool.actor_name}' not found in "
                          f"{lex.stage.label} Actor terms")
                )
    return diagnostics


def check_task_names(project: Project) -> list[Diagnostic]:
    diagnostics = []
    for model, lex in _model_pairs(project):
        processes = lex.names(Category.PROCESS)
        for _pool, node in model.tasks():
            if node.label not in processes:
                diagnostics.append(
                    error("R3", model.cell, model.subject,
                          f"task '{node.label}' not found in {lex.stage.label} Process terms")
                )
    return diagnostics


def check_effect_objects(project: Project) -> list[Diagnostic]:
    diagnostics = []
    for model, lex in _model_pairs(project):
        objects = lex.names(Category.OBJECT)
        for _pool, node in model.tasks():
            for effect in node.effects:
                if effect.object not in objects:
                    diagnostics.append(
                        error("R4", model.cell, model.subject,
                              f"effect object '{effect.object}' of task '{node.label}' not found in "
                              f"{lex.stage.label} Object terms")
                    )
    return diagnostics


def check_lanes(project: Project) -> list[Diagnostic]:
    units = project.notes.unit_names if project.notes else frozenset()
    diagnostics = []
    for model, lex in _model_pairs(project):
        allowed = lex.names(Category.ACTOR) | units
        for pool in model.pools:
            for lane in pool.lanes:
                if lane not in allowed:
                    diagnostics.append(
                        error("R5", model.cell, model.subject,
                              f"lane '{lane}' of pool '{pool.name}' not found in {lex.stage.label} "
                              f"Actor terms or organizational units")
                    )
    return diagnostics


def check_use_cases(project: Project) -> list[Diagnostic]:
    lex = project.lexicons.get(Stage.TOBE)
    if lex is None or project.use_cases is None:
        return []
    links = {ln.key for ln in lex.links}
    diagnostics = []
    for use_case in project.use_cases:
        supported = (
            lex.has(use_case.actor, Category.ACTOR)
            and lex.has(use_case.action, Category.PROCESS)
            and tuple(sorted((use_case.actor, use_case.action))) in links
        )
        if not supported:
            diagnostics.append(
                error("R6", PIM_TOBE, f"{PIM_TOBE.path}/usecases#{use_case.actor}-{use_case.action}",
                      f"use case ({use_case.actor}, {use_case.action}) has no supporting "
                      f"Actor-Process link in the ToBe lexicon")
            )
    return diagnostics


def check_classes(project: Project) -> list[Diagnostic]:
    lex = project.lexicons.get(Stage.TOBE)
    if lex is None or project.classes is None:
        return []
    class_terms = lex.names(Category.OBJECT) | lex.names(Category.ACTOR)
    attributes = lex.names(Category.ATTRIBUTE)
    diagnostics = []
    for name, attrs in project.classes.classes:
        subject = f"{PIM_TOBE.path}/classes#{name}"
        if name not in class_terms:
            diagnostics.append(
                error("R7", PIM_TOBE, subject, f"class '{name}' not found in ToBe Object or Actor terms")
            )
        for attr in attrs:
            if attr not in attributes:
                diagnostics.append(
                    error("R7", PIM_TOBE, subject,
                          f"attribute '{attr}' of class '{name}' not found in ToBe Attribute terms")
                )
    return diagnostics


def check_message_participants(project: Project) -> list[Diagnostic]:
    """Unmodelled message-flow participants must be actors; pools are covered by R2."""
    diagnostics = []
    for model, lex in _model_pairs(project):
        actors = _actor_names(project, lex)
        for participant in model.black_box_participants():
            if participant not in actors:
                diagnostics.append(
                    error("R8", model.cell, model.subject,
                          f"message flow participant '{participant}' not found in "
                          f"{lex.stage.label} Actor terms")
                )
    return diagnostics


RULES: tuple[Rule, ...] = (
    Rule("R1", "link endpoints are declared terms", LEXICON_CELLS, Severity.ERROR, check_link_endpoints),
    Rule("R2", "pool actors are Actor terms", MODEL_CELLS, Severity.ERROR, check_pool_actors),
    Rule("R3", "task names are Process terms", MODEL_CELLS, Severity.ERROR, check_task_names),
    Rule("R4", "effect objects are Object terms", MODEL_CELLS, Severity.ERROR, check_effect_objects),
    Rule("R5", "lanes are Actor terms or organizational units", MODEL_CELLS, Severity.ERROR, check_lanes),
    Rule("R6", "use cases rest on lexicon links", frozenset({PIM_TOBE}), Severity.ERROR, check_use_cases),
    Rule("R7", "classes are Object or Actor terms", frozenset({PIM_TOBE}), Severity.ERROR, check_classes),
    Rule("R8", "message participants are actors", MODEL_CELLS, Severity.ERROR, check_message_participants),
)


def run_rules(project: Project, scope: CellId | None = None) -> list[Diagnostic]:
    """Evaluate the rule catalog, optionally keeping one cell's findings.

    Args:
        project: Loaded snapshot.
        scope: Keep only diagnostics bound to this cell.

    Returns:
        Diagnostics sorted by (cell, code, subject).
    """
    diagnostics = []
    for rule in RULES:
        if scope is not None and scope not in rule.scope:
            continue
        found = rule.check(project)
        log.debug(f"Rule {rule.code}: {len(found)} findings")
        diagnostics.extend(found)
    if scope is not None:
        diagnostics = [d for d in diagnostics if d.cell == scope]
    return sort_diagnostics(diagnostics)


def suggest_terms(project: Project) -> dict[Stage, dict[Category, list[str]]]:
    """Names used in a stage's models but missing from its lexicon."""
    units = project.notes.unit_names if project.notes else frozenset()
    result: dict[Stage, dict[Category, list[str]]] = {}
    for stage in (Stage.ASIS, Stage.TOBE):
        models = project.models_for(stage)
        if not models:
            continue
        lex = project.lexicons.get(stage, OpaalLexicon(stage))
        actors = _actor_names(project, lex)
        missing: dict[Category, set[str]] = {c: set() for c in Category}
        for model in models:
            for pool in model.pools:
                if pool.actor_name not in actors:
                    missing[Category.ACTOR].add(pool.actor_name)
                missing[Category.ACTOR].update(
                    lane for lane in pool.lanes if lane not in actors and lane not in units
                )
            missing[Category.ACTOR].update(p for p in model.black_box_participants() if p not in actors)
            for _pool, node in model.tasks():
                if not lex.has(node.label, Category.PROCESS):
                    missing[Category.PROCESS].add(node.label)
                missing[Category.OBJECT].update(
                    e.object for e in node.effects if not lex.has(e.object, Category.OBJECT)
                )
        result[stage] = {c: sorted(names) for c, names in missing.items() if names}
    return result
