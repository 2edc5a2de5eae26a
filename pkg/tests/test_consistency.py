"""Tests for consistency rules and the project validator."""

import pytest

from easinnova.consistency import RULES, run_rules, suggest_terms
from easinnova.diagnostics import Severity, sort_diagnostics
from easinnova.gates import validate_project
from easinnova.matrix import ALL_CELLS, CellId, Stage
from easinnova.opaal import Category
from easinnova.project import Project
from tests.conftest import edit_json, find


def _findings(project):
    """Error and warning diagnostics as comparable tuples."""
    return {
        (d.severity, d.code, str(d.cell), d.subject, d.message)
        for d in validate_project(project)
        if d.severity is not Severity.INFO
    }


def _pool(data, name):
    return find(data["pools"], name=name)


def add_lexicon_link(root):
    edit_json(root / "cim/tobe/lexicon.json",
              lambda d: d["links"].append({"source": "Pizza", "target": "Oven"}))


def rename_pool_actor(root):
    edit_json(root / "pim/tobe/process.json", lambda d: _pool(d, "DoughMaker").update(actor="Mill"))


def inject_task(root):
    def edit(data):
        customer = _pool(data, "Customer")
        customer["nodes"].append({"id": "fryBurgers", "kind": "Task", "name": "FryBurgers"})
        find(customer["sequence_flows"], id="f1")["target"] = "fryBurgers"
        customer["sequence_flows"].append({"id": "f4", "source": "fryBurgers", "target": "submitOrder"})

    edit_json(root / "pim/tobe/process.json", edit)


def add_unknown_effect(root):
    def edit(data):
        make_dough = find(_pool(data, "DoughMaker")["nodes"], id="makeDough")
        make_dough["effects"].append({"object": "Invoice", "op": "C"})

    edit_json(root / "pim/tobe/process.json", edit)


def add_lane(root):
    edit_json(root / "pim/tobe/process.json", lambda d: _pool(d, "PizzaLove")["lanes"].append("Bakery"))


def add_use_case(root):
    edit_json(root / "pim/tobe/usecases.json",
              lambda d: d["use_cases"].append({"actor": "Customer", "action": "CookPizzas"}))


def add_class(root):
    edit_json(root / "pim/tobe/classes.json",
              lambda d: d["classes"].append({"name": "Invoice", "attributes": []}))


def add_black_box_message(root):
    edit_json(root / "pim/tobe/process.json", lambda d: d["message_flows"].append({
        "id": "flourOrder",
        "source_pool": "DoughMaker",
        "source": "makeDough",
        "target_pool": "Mill",
        "target": None,
    }))


def remove_dough_creation(root):
    def edit(data):
        find(_pool(data, "DoughMaker")["nodes"], id="makeDough")["effects"] = []

    edit_json(root / "pim/tobe/process.json", edit)


def remove_payments_mapping(root):
    def edit(data):
        data["mappings"] = [m for m in data["mappings"] if m["legacy_entity"] != "LegacyPayments"]

    edit_json(root / "psm/transformation/migration.json", edit)


def untype_task(root):
    def edit(data):
        find(_pool(data, "DoughMaker")["nodes"], id="makeDough")["execution_kind"] = "Unspecified"

    edit_json(root / "psm/tobe/process.json", edit)


class TestBaseline:
    """Tests for the clean PizzaLove project."""

    def test_known_warnings_only(self, project):
        """Test that only the acknowledged findings remain."""
        findings = _findings(project)

        assert all(severity is Severity.WARNING for severity, *_ in findings)
        assert sorted((code, subject) for _, code, _, subject, _ in findings) == [
            ("OPAAL-XCAT", "cim/asis/lexicon#Address"),
            ("OPAAL-XCAT", "cim/tobe/lexicon#Address"),
            ("R1", "cim/asis/lexicon#Order-Qty"),
            ("R1", "cim/asis/lexicon#Pizza-Pices"),
        ]

    def test_rules_without_waivers(self, project):
        """Test that the rule catalog itself still reports the typos as errors."""
        diagnostics = run_rules(project)
        assert [(d.code, d.severity) for d in diagnostics] == [
            ("R1", Severity.ERROR),
            ("R1", Severity.ERROR),
        ]

    def test_scope(self, project):
        """Test that a scoped run keeps only that cell."""
        assert len(run_rules(project, CellId.parse("CIM-ASIS"))) == 2
        assert run_rules(project, CellId.parse("CIM-TOBE")) == []
        assert run_rules(project, CellId.parse("PSM-ASIS")) == []

    def test_scoped_runs_within_full_run(self, pizzalove_dir):
        """Test that each cell's run is a slice of the full run on a broken project."""
        for mutate in (add_lexicon_link, rename_pool_actor, inject_task, add_unknown_effect,
                       add_lane, add_use_case, add_class, add_black_box_message):
            mutate(pizzalove_dir)
        project = Project.load(pizzalove_dir)
        full = run_rules(project)
        assert {d.code for d in full} == {f"R{i}" for i in range(1, 9)}

        covered = []
        for cell in ALL_CELLS:
            scoped = run_rules(project, cell)
            assert all(d in full and d.cell == cell for d in scoped)
            covered.extend(scoped)
        assert sort_diagnostics(covered) == full

    def test_catalog(self):
        """Test that the catalog holds R1 to R8 in order."""
        assert [r.code for r in RULES] == [f"R{i}" for i in range(1, 9)]
        assert all(r.severity is Severity.ERROR for r in RULES)

    def test_no_suggestions(self, project):
        """Test that every name the models use is declared."""
        assert all(not categories for categories in suggest_terms(project).values())


class TestMutations:
    """Tests that one defect yields one new diagnostic."""

    @pytest.mark.parametrize(
        "mutate,code,cell",
        [
            (add_lexicon_link, "R1", "CIM-TOBE"),
            (rename_pool_actor, "R2", "PIM-TOBE"),
            (inject_task, "R3", "PIM-TOBE"),
            (add_unknown_effect, "R4", "PIM-TOBE"),
            (add_lane, "R5", "PIM-TOBE"),
            (add_use_case, "R6", "PIM-TOBE"),
            (add_class, "R7", "PIM-TOBE"),
            (add_black_box_message, "R8", "PIM-TOBE"),
            (remove_dough_creation, "CRUD-NO-CREATE", "PIM-TOBE"),
            (remove_payments_mapping, "MIG-UNMAPPED", "PSM-TRANSFORMATION"),
            (untype_task, "PSM-UNTYPED", "PSM-TOBE"),
        ],
    )
    def test_single_new_error(self, pizzalove_dir, mutate, code, cell):
        """Test each injected defect against the clean baseline."""
        before = _findings(Project.load(pizzalove_dir))
        mutate(pizzalove_dir)
        after = _findings(Project.load(pizzalove_dir))

        new = after - before
        assert [(severity, c, where) for severity, c, where, _, _ in new] == [(Severity.ERROR, code, cell)]
        assert before <= after

    def test_injected_task_message(self, pizzalove_dir):
        """Test the exact finding for an unknown task name."""
        inject_task(pizzalove_dir)
        r3 = [d for d in validate_project(Project.load(pizzalove_dir)) if d.code == "R3"]
        assert [d.render() for d in r3] == [
            "ERROR R3 pim/tobe/process: task 'FryBurgers' not found in ToBe Process terms",
        ]

    def test_suggestions_after_mutation(self, pizzalove_dir):
        """Test that unknown names are offered as lexicon additions."""
        inject_task(pizzalove_dir)
        add_black_box_message(pizzalove_dir)
        suggestions = suggest_terms(Project.load(pizzalove_dir))
        assert suggestions[Stage.TOBE] == {
            Category.ACTOR: ["Mill"],
            Category.PROCESS: ["FryBurgers"],
        }
        assert suggestions[Stage.ASIS] == {}

    def test_stage_isolation(self, pizzalove_dir):
        """Test that an AsIs term does not satisfy a ToBe model."""
        def edit(data):
            find(_pool(data, "DoughMaker")["nodes"], id="makeDough")["name"] = "MakingDough"

        edit_json(pizzalove_dir / "pim/tobe/process.json", edit)
        diagnostics = run_rules(Project.load(pizzalove_dir), CellId.parse("PIM-TOBE"))
        assert [d.message for d in diagnostics] == [
            "task 'MakingDough' not found in ToBe Process terms",
        ]
