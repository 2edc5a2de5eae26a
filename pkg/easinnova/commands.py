"""Command dispatcher for the easinnova CLI."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TextIO

from .analysis import select_candidate
from .bpmn_io import export_bpmn, import_bpmn, validate_bpmn_schema
from .config import Config
from .consistency import suggest_terms
from .crud import check_cruda_completeness, derive_cruda
from .diagnostics import Diagnostic, has_errors, render_json, render_text, sort_diagnostics
from .documents import ANNOTATIONS_SCHEMA, dump_json, read_json, write_json
from .errors import PreconditionError
from .gates import cell_status, matrix_status, next_step, render_matrix, validate_project
from .matrix import CellId, Layer, Stage
from .opaal import derive_class_skeleton, derive_use_cases, diff_lexicons
from .process import check_executable, enrich_to_psm, serialize_process
from .project import EXPORT_DIR, Project, init_project
from .simulate import SimConfig, SimOutcome, TraceReport, explore, random_trace

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CommandHandler:
    """Runs one parsed invocation against a project directory."""

    def __init__(self, config: Config, project_dir: Path, out: TextIO | None = None):
        self.config = config
        self.project_dir = project_dir
        self.out = out or sys.stdout

    def handle(self, args: argparse.Namespace) -> int:
        """Dispatch a command and return its exit code."""
        handlers = {
            "init": self._handle_init,
            "status": self._handle_status,
            "validate": self._handle_validate,
            "lexicon": self._handle_lexicon,
            "derive": self._handle_derive,
            "crud-matrix": self._handle_crud_matrix,
            "export": self._handle_export,
            "simulate": self._handle_simulate,
            "enrich": self._handle_enrich,
            "select": self._handle_select,
            "import": self._handle_import,
        }

        handler = handlers.get(args.command)
        if handler is None:
            log.warning(f"Unknown command: {args.command}")
            return EXIT_USAGE
        return handler(args)

    # helpers

    def _format(self, args: argparse.Namespace) -> str:
        return getattr(args, "format", None) or self.config.output.format

    def _write(self, text: str) -> None:
        self.out.write(text)

    def _load(self) -> Project:
        return Project.load(self.project_dir)

    def _sim_config(self, args: argparse.Namespace) -> SimConfig:
        max_states = getattr(args, "max_states", None)
        if max_states is None:
            max_states = self.config.simulation.max_states
        return SimConfig(max_states=max_states)

    def _diagnostics(self, args: argparse.Namespace, diagnostics: list[Diagnostic]) -> None:
        if self._format(args) == "json":
            self._write(render_json(diagnostics))
        else:
            self._write(render_text(diagnostics))

    # handlers

    def _handle_init(self, args: argparse.Namespace) -> int:
        project = init_project(args.name, self.project_dir)
        if self._format(args) == "json":
            self._write(dump_json({"name": project.name, "path": str(project.root)}))
        else:
            self._write(f"Initialized project {project.name} in {project.root}\n")
        return EXIT_OK

    def _handle_status(self, args: argparse.Namespace) -> int:
        project = self._load()
        statuses = matrix_status(project, self._sim_config(args), self.config.export.schema_path)
        step = next_step(project, statuses)
        if self._format(args) == "json":
            self._write(dump_json({
                "project": project.name,
                "cells": [s.to_dict() for s in statuses],
                "next_step": str(step),
            }))
        else:
            self._write(render_matrix(statuses, step))
        return EXIT_OK

    def _handle_validate(self, args: argparse.Namespace) -> int:
        project = self._load()
        diagnostics = validate_project(project)
        if args.cell:
            diagnostics = list(
                cell_status(
                    project, args.cell, diagnostics, self._sim_config(args), self.config.export.schema_path
                ).diagnostics
            )

        if not args.suggest:
            self._diagnostics(args, diagnostics)
        else:
            suggestions = suggest_terms(project)
            if self._format(args) == "json":
                self._write(dump_json({
                    "diagnostics": [d.to_dict() for d in diagnostics],
                    "suggestions": {
                        stage.name: {c.value: names for c, names in cats.items()}
                        for stage, cats in suggestions.items()
                    },
                }))
            else:
                self._write(render_text(diagnostics))
                for stage, cats in suggestions.items():
                    for category, names in cats.items():
                        self._write(f"SUGGEST {stage.label} {category.value}: {', '.join(names)}\n")
        return EXIT_ERRORS if has_errors(diagnostics) else EXIT_OK

    def _handle_lexicon(self, args: argparse.Namespace) -> int:
        project = self._load()
        asis = project.lexicons.get(Stage.ASIS)
        tobe = project.lexicons.get(Stage.TOBE)
        if asis is None or tobe is None:
            raise PreconditionError("lexicon diff needs both the AsIs and the ToBe lexicon")
        diff = diff_lexicons(asis, tobe)
        if self._format(args) == "json":
            self._write(dump_json(diff.to_dict()))
        else:
            self._write(diff.render())
        return EXIT_OK

    def _handle_derive(self, args: argparse.Namespace) -> int:
        project = self._load()
        stage: Stage = args.stage
        lex = project.lexicons.get(stage)
        if lex is None:
            raise PreconditionError(f"no {stage.label} lexicon to derive from")
        waived = project.waived_links.get(stage, frozenset())
        use_cases = derive_use_cases(lex, waived)
        skeleton = derive_class_skeleton(lex, waived)

        if args.write:
            if stage is not Stage.TOBE:
                raise PreconditionError("only ToBe derivations are stored (pim/tobe)")
            cell_dir = project.cell_dir(CellId(Layer.PIM, Stage.TOBE))
            note = "Derived from the ToBe OPAAL lexicon"
            write_json(cell_dir / "usecases.json",
                       {"note": note, "use_cases": [u.to_dict() for u in use_cases]})
            write_json(cell_dir / "classes.json", {"note": note, **skeleton.to_dict()})
            log.info(f"Wrote derived use cases and classes to {cell_dir}")

        if self._format(args) == "json":
            self._write(dump_json({
                "stage": stage.name,
                "use_cases": [u.to_dict() for u in use_cases],
                **skeleton.to_dict(),
            }))
        else:
            self._write("Use cases:\n")
            for use_case in use_cases:
                self._write(f"  {use_case.actor} -> {use_case.action}\n")
            self._write("Classes:\n")
            for name, attrs in skeleton.classes:
                self._write(f"  {name}" + (f" ({', '.join(attrs)})" if attrs else "") + "\n")
            self._write("Associations:\n")
            for source, target, _label in skeleton.associations:
                self._write(f"  {source} -- {target}\n")
        return EXIT_OK

    def _handle_crud_matrix(self, args: argparse.Namespace) -> int:
        project = self._load()
        stage: Stage = args.stage
        model = project.pim_model(stage)
        lex = project.lexicons.get(stage)
        if model is None or lex is None:
            raise PreconditionError(f"CRUDA matrix needs the {stage.label} PIM model and lexicon")
        matrix, diagnostics = derive_cruda([model], lex)
        diagnostics = sort_diagnostics(diagnostics + check_cruda_completeness(matrix))
        if self._format(args) == "json":
            self._write(dump_json({
                "matrix": matrix.to_dict(),
                "diagnostics": [d.to_dict() for d in diagnostics],
            }))
        else:
            self._write(matrix.render())
            self._write(render_text(diagnostics))
        return EXIT_ERRORS if has_errors(diagnostics) else EXIT_OK

    def _handle_export(self, args: argparse.Namespace) -> int:
        project = self._load()
        stage: Stage = args.stage
        model = project.processes.get(CellId(Layer.PSM, stage))
        if model is None:
            raise PreconditionError(f"no {stage.label} PSM model to export")
        data = export_bpmn(model, args.vendor or self.config.export.vendor)
        errors = validate_bpmn_schema(data, self.config.export.schema_path)
        if errors:
            for message in errors:
                log.error(f"Schema violation: {message}")
            return EXIT_ERRORS

        target = args.output or project.root / EXPORT_DIR / f"{stage.name.lower()}.bpmn"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        log.info(f"Exported {stage.label} model to {target}")
        if self._format(args) == "json":
            self._write(dump_json({"path": str(target), "bytes": len(data)}))
        else:
            self._write(f"{target}\n")
        return EXIT_OK

    def _handle_simulate(self, args: argparse.Namespace) -> int:
        project = self._load()
        stage: Stage = args.stage
        if args.cell:
            model = project.processes.get(args.cell)
        else:
            model = project.processes.get(CellId(Layer.PSM, stage)) or project.pim_model(stage)
        if model is None:
            raise PreconditionError(f"no {stage.label} process model to simulate")

        sim_config = self._sim_config(args)
        if args.mode == "trace":
            events = random_trace(model, args.seed, self.config.simulation.trace_steps, sim_config)
            trace = TraceReport(args.seed, events)
            self._write(dump_json(trace.to_dict()) if self._format(args) == "json" else trace.render())
            return EXIT_OK

        report = explore(model, sim_config)
        self._write(dump_json(report.to_dict()) if self._format(args) == "json" else report.render())
        return EXIT_OK if report.outcome is SimOutcome.PROPER_COMPLETION else EXIT_ERRORS

    def _handle_enrich(self, args: argparse.Namespace) -> int:
        project = self._load()
        model = project.pim_model(Stage.TOBE)
        if model is None:
            raise PreconditionError("no ToBe PIM model to enrich")
        annotations = read_json(args.annotations, ANNOTATIONS_SCHEMA)
        enriched = enrich_to_psm(model, annotations)
        target = project.cell_dir(CellId(Layer.PSM, Stage.TOBE)) / "process.json"
        write_json(target, {"note": f"Enriched from pim/tobe with {args.annotations.name}",
                            **serialize_process(enriched)})
        diagnostics = check_executable(enriched)
        self._diagnostics(args, diagnostics)
        return EXIT_ERRORS if has_errors(diagnostics) else EXIT_OK

    def _handle_select(self, args: argparse.Namespace) -> int:
        project = self._load()
        solutions = project.analysis.solutions
        if solutions is None:
            raise PreconditionError("no solutions recorded")
        updated = select_candidate(solutions, args.label)
        path = project.cell_dir(CellId(Layer.CIM, Stage.TRANSFORMATION)) / "solutions.json"
        document = read_json(path)
        document["solutions"] = [s.to_dict() for s in updated]
        write_json(path, document)
        if self._format(args) == "json":
            self._write(dump_json({"selected": args.label}))
        else:
            self._write(f"Selected {args.label}\n")
        return EXIT_OK

    def _handle_import(self, args: argparse.Namespace) -> int:
        stage: Stage = args.stage
        model, diagnostics = import_bpmn(args.file.read_bytes(), stage)
        if self._format(args) == "json":
            self._write(dump_json(
                {"model": serialize_process(model), "diagnostics": [d.to_dict() for d in diagnostics]}
            ))
        else:
            self._write(dump_json(serialize_process(model)))
            self._write(render_text(diagnostics))
        return EXIT_ERRORS if has_errors(diagnostics) else EXIT_OK
