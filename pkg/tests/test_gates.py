"""Tests for gates module."""

from easinnova.gates import CellState, cell_status, matrix_status, next_step, render_matrix
from easinnova.matrix import ALL_CELLS, CellId, Done
from easinnova.project import MANIFEST, Project, init_project
from easinnova.simulate import SimConfig
from tests.conftest import edit_json


def _gate_codes(status):
    return [d.code for d in status.diagnostics if d.code.startswith("GATE-")]


class TestMatrixStatus:
    """Tests for matrix_status and next_step."""

    def test_pizzalove_is_done(self, project):
        """Test that every cell of the worked example is Ready."""
        statuses = matrix_status(project)

        assert [s.cell for s in statuses] == list(ALL_CELLS)
        assert all(s.state is CellState.READY for s in statuses)
        assert next_step(project, statuses) is Done

    def test_new_project(self, tmp_path):
        """Test that an empty project starts at CIM-AsIs."""
        project = init_project("Bakery", tmp_path)
        statuses = matrix_status(project)
        assert all(s.state is CellState.EMPTY for s in statuses)
        assert next_step(project) == CellId.parse("CIM-ASIS")

    def test_render(self, project):
        """Test the text matrix."""
        text = render_matrix(matrix_status(project), Done)
        lines = text.splitlines()
        assert lines[0].split() == ["AsIs", "Transformation", "ToBe"]
        assert lines[1].split() == ["CIM", "Ready", "Ready", "Ready"]
        assert lines[-1] == "Next step: Done"

    def test_to_dict(self, project):
        """Test the JSON form of a cell status."""
        status = cell_status(project, CellId.parse("CIM-ASIS"))
        data = status.to_dict()
        assert data["cell"] == "CIM-ASIS"
        assert data["state"] == "Ready"
        assert {d["code"] for d in data["diagnostics"] if d["severity"] != "Info"} == {"OPAAL-XCAT", "R1"}


class TestGates:
    """Tests for the per-cell checklists."""

    def test_missing_problems(self, pizzalove_dir):
        """Test that CIM-AsIs needs a recorded problem."""
        (pizzalove_dir / "cim/transformation/motivations.json").unlink()
        project = Project.load(pizzalove_dir)

        status = cell_status(project, CellId.parse("CIM-ASIS"))
        assert status.state is CellState.DRAFT
        assert _gate_codes(status) == ["GATE-CIM-ASIS-PROBLEMS"]
        assert next_step(project) == CellId.parse("CIM-ASIS")

    def test_unsigned_actor(self, pizzalove_dir):
        """Test that CIM-ToBe waits for every actor's sign-off."""
        def edit(data):
            data["actors_registry"][3]["signed_off"] = False

        edit_json(pizzalove_dir / MANIFEST, edit)
        status = cell_status(Project.load(pizzalove_dir), CellId.parse("CIM-TOBE"))
        assert _gate_codes(status) == ["GATE-CIM-TOBE-SIGNOFF"]
        assert "PizzaCook" in status.diagnostics[0].message

    def test_no_selection(self, pizzalove_dir):
        """Test that CIM-Transformation needs a selected solution."""
        def edit(data):
            for solution in data["solutions"]:
                solution["selected"] = False

        edit_json(pizzalove_dir / "cim/transformation/solutions.json", edit)
        project = Project.load(pizzalove_dir)
        status = cell_status(project, CellId.parse("CIM-TRANSFORMATION"))
        assert _gate_codes(status) == ["GATE-CIM-TRANSFORMATION-SELECTION"]
        assert next_step(project) == CellId.parse("CIM-TRANSFORMATION")

    def test_missing_units(self, pizzalove_dir):
        """Test that PIM-Transformation needs organizational units."""
        edit_json(pizzalove_dir / "pim/transformation/notes.json", lambda d: d.update(units=[]))
        status = cell_status(Project.load(pizzalove_dir), CellId.parse("PIM-TRANSFORMATION"))
        assert _gate_codes(status) == ["GATE-PIM-TRANSFORMATION-UNITS"]

    def test_simulation_bound(self, project):
        """Test that PSM-ToBe is Draft when the simulation cannot finish."""
        status = cell_status(project, CellId.parse("PSM-TOBE"), sim_config=SimConfig(max_states=3))
        assert status.state is CellState.DRAFT
        assert _gate_codes(status) == ["GATE-PSM-TOBE-SIMULATION"]

    def test_findings_make_draft(self, pizzalove_dir):
        """Test that a validation error alone keeps a cell in Draft."""
        edit_json(
            pizzalove_dir / "pim/tobe/usecases.json",
            lambda d: d["use_cases"].append({"actor": "Customer", "action": "CookPizzas"}),
        )
        status = cell_status(Project.load(pizzalove_dir), CellId.parse("PIM-TOBE"))
        assert status.state is CellState.DRAFT
        assert _gate_codes(status) == []
        assert [d.code for d in status.diagnostics if d.is_error] == ["R6"]

    def test_empty_cell(self, pizzalove_dir):
        """Test that a cell without artifacts is Empty, not Draft."""
        (pizzalove_dir / "psm/asis/inventory.json").unlink()
        status = cell_status(Project.load(pizzalove_dir), CellId.parse("PSM-ASIS"))
        assert status.state is CellState.EMPTY
        assert status.diagnostics == ()
