"""On-disk project: manifest, the nine cell directories and their artifacts."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import (
    InnovationStatement,
    MotivationRecord,
    SolutionRecord,
    StrategyRecord,
    TransformationAnalysis,
)
from .diagnostics import Diagnostic, error, info, sort_diagnostics
from .documents import (
    CLASSES_SCHEMA,
    INVENTORY_SCHEMA,
    MIGRATION_SCHEMA,
    MOTIVATIONS_SCHEMA,
    NOTES_SCHEMA,
    PLATFORM_SCHEMA,
    PROCESS_SCHEMA,
    PROJECT_SCHEMA,
    SOLUTIONS_SCHEMA,
    STRATEGIES_SCHEMA,
    TEXT_SCHEMA,
    USECASES_SCHEMA,
    read_json,
    write_json,
)
from .errors import PreconditionError, ProjectExistsError
from .matrix import ALL_CELLS, CellId, Layer, Stage
from .opaal import ClassModelSkeleton, OpaalLexicon, UseCase, parse_lexicon
from .process import Maturity, ProcessModel, parse_process
from .settings import ProjectSettings
from .transition import DataInventoryEntry, MigrationMapping, PlatformChoice

log = logging.getLogger(__name__)

MANIFEST = "project.json"
EXPORT_DIR = "export"
PROJECT_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")

LEXICON_FILE = "lexicon.json"

# Known artifact files per cell, with the envelope schema each must match
ARTIFACTS: dict[CellId, dict[str, dict]] = {
    CellId(Layer.CIM, Stage.ASIS): {"narrative.json": TEXT_SCHEMA, LEXICON_FILE: {}},
    CellId(Layer.CIM, Stage.TRANSFORMATION): {
        "motivations.json": MOTIVATIONS_SCHEMA,
        "statement.json": TEXT_SCHEMA,
        "strategies.json": STRATEGIES_SCHEMA,
        "solutions.json": SOLUTIONS_SCHEMA,
    },
    CellId(Layer.CIM, Stage.TOBE): {"narrative.json": TEXT_SCHEMA, LEXICON_FILE: {}},
    CellId(Layer.PIM, Stage.ASIS): {"process.json": PROCESS_SCHEMA},
    CellId(Layer.PIM, Stage.TRANSFORMATION): {"notes.json": NOTES_SCHEMA},
    CellId(Layer.PIM, Stage.TOBE): {
        "process.json": PROCESS_SCHEMA,
        "classes.json": CLASSES_SCHEMA,
        "usecases.json": USECASES_SCHEMA,
    },
    CellId(Layer.PSM, Stage.ASIS): {"inventory.json": INVENTORY_SCHEMA},
    CellId(Layer.PSM, Stage.TRANSFORMATION): {
        "platform.json": PLATFORM_SCHEMA,
        "migration.json": MIGRATION_SCHEMA,
    },
    CellId(Layer.PSM, Stage.TOBE): {"process.json": PROCESS_SCHEMA},
}

# Cells whose process.json is expected at a given maturity
PROCESS_CELLS = {
    CellId(Layer.PIM, Stage.ASIS): Maturity.PIM,
    CellId(Layer.PIM, Stage.TOBE): Maturity.PIM,
    CellId(Layer.PSM, Stage.TOBE): Maturity.PSM,
}


@dataclass(frozen=True)
class ActorEntry:
    name: str
    signed_off: bool = False  # CIM-ToBe validation
    pim_signed_off: bool = False  # PIM-ToBe validation

    def to_dict(self) -> dict:
        return {"name": self.name, "signed_off": self.signed_off, "pim_signed_off": self.pim_signed_off}


@dataclass(frozen=True)
class TransformationNotes:
    """PIM-Transformation guidelines and the organizational units they introduce."""

    guidelines: tuple[str, ...] = ()
    units: tuple[tuple[str, str], ...] = ()

    @property
    def unit_names(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.units)


@dataclass(frozen=True)
class Project:
    """Immutable snapshot of a project directory."""

    root: Path
    name: str
    settings: ProjectSettings = field(default_factory=ProjectSettings)
    actors_registry: tuple[ActorEntry, ...] = ()
    cells: dict[CellId, tuple[str, ...]] = field(default_factory=dict)
    narratives: dict[Stage, str] = field(default_factory=dict)
    lexicons: dict[Stage, OpaalLexicon] = field(default_factory=dict)
    analysis: TransformationAnalysis = field(default_factory=TransformationAnalysis)
    processes: dict[CellId, ProcessModel] = field(default_factory=dict)
    notes: TransformationNotes | None = None
    classes: ClassModelSkeleton | None = None
    use_cases: tuple[UseCase, ...] | None = None
    inventory: tuple[DataInventoryEntry, ...] | None = None
    platform: PlatformChoice | None = None
    migration: tuple[MigrationMapping, ...] | None = None
    load_diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def enterprise(self) -> str:
        return self.settings.enterprise or self.name

    def cell_dir(self, cell: CellId) -> Path:
        return self.root / cell.path

    def artifacts(self, cell: CellId) -> tuple[str, ...]:
        """Known artifact files present in a cell."""
        return self.cells.get(cell, ())

    def models_for(self, stage: Stage) -> list[ProcessModel]:
        return [m for c, m in sorted(self.processes.items()) if c.stage is stage]

    def pim_model(self, stage: Stage) -> ProcessModel | None:
        return self.processes.get(CellId(Layer.PIM, stage))

    @property
    def waived_links(self) -> dict[Stage, frozenset[str]]:
        """Link texts whose R1 findings are waived, per stage."""
        result = {}
        for stage in (Stage.ASIS, Stage.TOBE):
            prefix = f"{CellId(Layer.CIM, stage).path}/lexicon#"
            result[stage] = frozenset(
                w.subject[len(prefix):]
                for w in self.settings.waivers
                if w.code == "R1" and w.subject.startswith(prefix)
            )
        return result

    @classmethod
    def load(cls, root: Path) -> Project:
        """Load every artifact of the project rooted at ``root``.

        Raises:
            ArtifactError: missing manifest or an unreadable artifact.
        """
        manifest = read_json(root / MANIFEST, PROJECT_SCHEMA)
        diagnostics: list[Diagnostic] = []
        settings = ProjectSettings.from_dict(manifest.get("settings", {}))
        actors = tuple(
            ActorEntry(a["name"], a.get("signed_off", False), a.get("pim_signed_off", False))
            for a in manifest.get("actors_registry", [])
        )
        seen: set[str] = set()
        for actor in actors:
            if actor.name in seen:
                cell = CellId(Layer.CIM, Stage.TOBE)
                diagnostics.append(
                    error("PROJ-DUP-ACTOR", cell, f"{MANIFEST}#{actor.name}",
                          f"actor '{actor.name}' registered twice")
                )
            seen.add(actor.name)

        cells: dict[CellId, tuple[str, ...]] = {}
        docs: dict[tuple[CellId, str], dict] = {}
        for cell in ALL_CELLS:
            cell_dir = root / cell.path
            known = ARTIFACTS[cell]
            present = []
            if cell_dir.is_dir():
                for path in sorted(cell_dir.iterdir()):
                    if path.name in known and path.is_file():
                        present.append(path.name)
                        docs[(cell, path.name)] = read_json(path, known[path.name] or None)
                    else:
                        log.debug(f"Ignoring unknown file {path}")
                        diagnostics.append(
                            info("PROJ-UNKNOWN-FILE", cell, f"{cell.path}/{path.name}",
                                 "not a known artifact; ignored")
                        )
            cells[cell] = tuple(present)

        def doc(layer: Layer, stage: Stage, name: str) -> dict | None:
            return docs.get((CellId(layer, stage), name))

        narratives = {}
        lexicons = {}
        for stage in (Stage.ASIS, Stage.TOBE):
            cell = CellId(Layer.CIM, stage)
            narrative = doc(Layer.CIM, stage, "narrative.json")
            if narrative is not None:
                narratives[stage] = narrative["text"]
            lexicon_doc = doc(Layer.CIM, stage, LEXICON_FILE)
            if lexicon_doc is not None:
                lex, lex_diags = parse_lexicon(lexicon_doc, str(root / cell.path / LEXICON_FILE))
                diagnostics.extend(lex_diags)
                if lex.stage is not stage:
                    diagnostics.append(
                        error("PROJ-STAGE-MISMATCH", cell, f"{cell.path}/lexicon",
                              f"lexicon declares stage {lex.stage.name} but sits in {cell.path}")
                    )
                lexicons[stage] = lex

        processes = {}
        for cell, maturity in PROCESS_CELLS.items():
            process_doc = docs.get((cell, "process.json"))
            if process_doc is None:
                continue
            model = parse_process(process_doc, str(root / cell.path / "process.json"))
            if model.stage is not cell.stage or model.maturity is not maturity:
                diagnostics.append(
                    error("PROJ-STAGE-MISMATCH", cell, f"{cell.path}/process",
                          f"model is {model.stage.name}/{model.maturity.value} "
                          f"but sits in {cell.path}")
                )
            processes[cell] = model

        motivations = doc(Layer.CIM, Stage.TRANSFORMATION, "motivations.json")
        statement = doc(Layer.CIM, Stage.TRANSFORMATION, "statement.json")
        strategies = doc(Layer.CIM, Stage.TRANSFORMATION, "strategies.json")
        solutions = doc(Layer.CIM, Stage.TRANSFORMATION, "solutions.json")
        analysis = TransformationAnalysis(
            motivations=tuple(MotivationRecord.from_dict(m) for m in motivations["motivations"])
            if motivations else None,
            statement=InnovationStatement(statement["text"]) if statement else None,
            strategies=tuple(StrategyRecord.from_dict(s) for s in strategies["strategies"])
            if strategies else None,
            solutions=tuple(SolutionRecord.from_dict(s) for s in solutions["solutions"])
            if solutions else None,
        )

        notes_doc = doc(Layer.PIM, Stage.TRANSFORMATION, "notes.json")
        classes_doc = doc(Layer.PIM, Stage.TOBE, "classes.json")
        usecases_doc = doc(Layer.PIM, Stage.TOBE, "usecases.json")
        inventory_doc = doc(Layer.PSM, Stage.ASIS, "inventory.json")
        platform_doc = doc(Layer.PSM, Stage.TRANSFORMATION, "platform.json")
        migration_doc = doc(Layer.PSM, Stage.TRANSFORMATION, "migration.json")

        project = cls(
            root=root,
            name=manifest["name"],
            settings=settings,
            actors_registry=actors,
            cells=cells,
            narratives=narratives,
            lexicons=lexicons,
            analysis=analysis,
            processes=processes,
            notes=TransformationNotes(
                guidelines=tuple(notes_doc.get("guidelines", [])),
                units=tuple((u["name"], u.get("description", "")) for u in notes_doc.get("units", [])),
            ) if notes_doc is not None else None,
            classes=ClassModelSkeleton.from_dict(classes_doc) if classes_doc is not None else None,
            use_cases=tuple(UseCase(u["actor"], u["action"]) for u in usecases_doc["use_cases"])
            if usecases_doc is not None else None,
            inventory=tuple(DataInventoryEntry.from_dict(e) for e in inventory_doc["entries"])
            if inventory_doc is not None else None,
            platform=PlatformChoice.from_dict(platform_doc) if platform_doc is not None else None,
            migration=tuple(MigrationMapping.from_dict(m) for m in migration_doc["mappings"])
            if migration_doc is not None else None,
            load_diagnostics=tuple(sort_diagnostics(diagnostics)),
        )
        log.info(f"Loaded project {project.name}: {sum(len(v) for v in cells.values())} artifacts")
        return project


def init_project(name: str, target: Path) -> Project:
    """Create an empty project skeleton and return it loaded.

    Raises:
        ProjectExistsError: ``target`` already holds a manifest.
        PreconditionError: ``name`` is not an identifier.
        OSError: ``target`` is not writable.
    """
    if not PROJECT_NAME_RE.match(name):
        raise PreconditionError(f"Invalid project name: {name!r}")
    if (target / MANIFEST).exists():
        raise ProjectExistsError(f"{target} is already initialized")
    target.mkdir(parents=True, exist_ok=True)
    for cell in ALL_CELLS:
        (target / cell.path).mkdir(parents=True, exist_ok=True)
    write_json(
        target / MANIFEST,
        {"name": name, "settings": ProjectSettings().to_dict(), "actors_registry": []},
    )
    log.info(f"Initialized project {name} in {target}")
    return Project.load(target)
