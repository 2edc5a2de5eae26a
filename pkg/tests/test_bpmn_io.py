"""Tests for bpmn_io module."""

from dataclasses import replace

import pytest
from lxml import etree

from easinnova.bpmn_io import BPMN_NS, CAMUNDA_NS, export_bpmn, import_bpmn, validate_bpmn_schema
from easinnova.errors import BpmnError, PreconditionError
from easinnova.matrix import Stage
from easinnova.process import ExecutionKind, Maturity, NodeKind
from tests.conftest import random_psm_model, sequential_model

NS = {"bpmn": BPMN_NS}

MINIMAL = f"""<?xml version="1.0" encoding="UTF-8"?>
<definitions xmlns="{BPMN_NS}" targetNamespace="urn:test">
  <process id="Shop" name="Shop">
    <startEvent id="s"/>
    <userTask id="take" name="TakeOrder"/>
    <endEvent id="e"/>
    <sequenceFlow id="a" sourceRef="s" targetRef="take"/>
    <sequenceFlow id="b" sourceRef="take" targetRef="e"/>
  </process>
</definitions>
"""


def _rename_node(pool, old, new):
    nodes = tuple(replace(n, id=new) if n.id == old else n for n in pool.nodes)
    flows = tuple(
        replace(f, source=new if f.source == old else f.source, target=new if f.target == old else f.target)
        for f in pool.sequence_flows
    )
    return replace(pool, nodes=nodes, sequence_flows=flows)


def _without_effects(model):
    pools = tuple(
        replace(pool, nodes=tuple(replace(n, effects=()) for n in pool.nodes)) for pool in model.pools
    )
    return replace(model, pools=pools)


class TestExport:
    """Tests for export_bpmn."""

    def test_tobe_collaboration(self, tobe_psm):
        """Test the shape of the exported ToBe collaboration."""
        root = etree.fromstring(export_bpmn(tobe_psm))

        participants = root.findall("bpmn:collaboration/bpmn:participant", NS)
        assert [p.get("name") for p in participants] == [
            "Customer", "PizzaLove", "DeliveryService", "DoughMaker",
        ]
        assert len(root.findall("bpmn:collaboration/bpmn:messageFlow", NS)) == 4
        assert len(root.findall("bpmn:process", NS)) == 4
        assert len(root.findall(".//bpmn:userTask", NS)) == 3
        assert len(root.findall(".//bpmn:manualTask", NS)) == 5
        assert len(root.findall(".//bpmn:serviceTask", NS)) == 1
        lanes = root.findall(".//bpmn:lane", NS)
        assert [lane.get("name") for lane in lanes] == ["CRM", "PizzaCook", "SCM"]

    def test_schema_valid(self, tobe_psm):
        """Test that the export validates against the bundled schema."""
        assert validate_bpmn_schema(export_bpmn(tobe_psm)) == []
        assert validate_bpmn_schema(export_bpmn(tobe_psm, "camunda")) == []

    def test_deterministic(self, tobe_psm):
        """Test that two exports are byte-identical."""
        assert export_bpmn(tobe_psm) == export_bpmn(tobe_psm)

    def test_default_flow(self, tobe_psm):
        """Test that the XOR default and condition survive."""
        root = etree.fromstring(export_bpmn(tobe_psm))
        gateway = root.find(".//bpmn:exclusiveGateway[@id='PizzaLove__checkStock']", NS)
        assert gateway.get("default") == "PizzaLove__f5"
        condition = root.find(".//bpmn:sequenceFlow[@id='PizzaLove__f4']/bpmn:conditionExpression", NS)
        assert condition.text == "doughStock < DoughThreshold"

    def test_camunda_hints(self, tobe_psm):
        """Test engine attributes on automatic tasks."""
        root = etree.fromstring(export_bpmn(tobe_psm, "camunda"))
        service = root.find(".//bpmn:serviceTask", NS)
        assert service.get(f"{{{CAMUNDA_NS}}}type") == "external"
        assert service.get(f"{{{CAMUNDA_NS}}}topic") == "AlertPizzasReady"
        assert CAMUNDA_NS not in export_bpmn(tobe_psm).decode()

    def test_unknown_vendor(self, tobe_psm):
        """Test that an unknown vendor is a ValueError."""
        with pytest.raises(ValueError):
            export_bpmn(tobe_psm, "zeebe")

    def test_pim_model_refused(self, tobe_pim):
        """Test that PIM models are not exported."""
        with pytest.raises(PreconditionError):
            export_bpmn(tobe_pim)

    def test_untyped_task_refused(self):
        """Test that a PSM model with an untyped task is not exported."""
        model = sequential_model(1, Maturity.PSM)
        pool = model.pools[0]
        pool = replace(pool, nodes=tuple(
            replace(n, execution_kind=ExecutionKind.UNSPECIFIED) if n.kind is NodeKind.TASK else n
            for n in pool.nodes
        ))
        with pytest.raises(PreconditionError, match="no execution kind"):
            export_bpmn(replace(model, pools=(pool,)))

    def test_default_outside_xor_refused(self):
        """Test that a default flag BPMN cannot carry is not dropped silently."""
        model = sequential_model(1, Maturity.PSM)
        pool = model.pools[0]
        pool = replace(pool, sequence_flows=tuple(
            replace(f, default=True) if f.source == "t0" else f for f in pool.sequence_flows
        ))
        with pytest.raises(PreconditionError, match="not an XOR split"):
            export_bpmn(replace(model, pools=(pool,)))

    def test_pool_and_node_ids_cannot_merge(self):
        """Test that pool A/node B__t and pool A__B/node t are not exported."""
        model = sequential_model(1, Maturity.PSM)
        solo = model.pools[0]
        first = _rename_node(replace(solo, name="A"), "t0", "B__t")
        second = _rename_node(replace(solo, name="A__B"), "t0", "t")
        with pytest.raises(PreconditionError, match="not a valid identifier"):
            export_bpmn(replace(model, pools=(first, second)))

    def test_node_named_like_lane_set(self):
        """Test that a node cannot take the lane set id."""
        model = sequential_model(1, Maturity.PSM)
        pool = _rename_node(replace(model.pools[0], name="A", lanes=("L",)), "t0", "laneset")
        with pytest.raises(PreconditionError, match="reserved"):
            export_bpmn(replace(model, pools=(pool,)))

    def test_underscored_ids_export_valid(self):
        """Test that single inner underscores give unique, schema-valid ids."""
        model = sequential_model(1, Maturity.PSM)
        solo = model.pools[0]
        first = _rename_node(replace(solo, name="A", lanes=("L",)), "t0", "B_t")
        second = _rename_node(replace(solo, name="A_B"), "t0", "t")
        data = export_bpmn(replace(model, pools=(first, second)))

        ids = [e.get("id") for e in etree.fromstring(data).iter() if e.get("id")]
        assert len(ids) == len(set(ids))
        assert validate_bpmn_schema(data) == []


class TestImport:
    """Tests for import_bpmn."""

    def test_minimal(self):
        """Test a bare process without a collaboration."""
        model, diagnostics = import_bpmn(MINIMAL)

        assert diagnostics == []
        assert model.maturity is Maturity.PSM
        pool = model.pool("Shop")
        assert [n.kind for n in pool.nodes] == [NodeKind.START_NONE, NodeKind.TASK, NodeKind.END]
        assert pool.node("take").execution_kind is ExecutionKind.USER
        assert [(f.source, f.target) for f in pool.sequence_flows] == [("s", "take"), ("take", "e")]

    def test_tobe_round_trip(self, tobe_psm):
        """Test that everything but task effects comes back."""
        model, diagnostics = import_bpmn(export_bpmn(tobe_psm), Stage.TOBE)
        assert diagnostics == []
        assert model == _without_effects(tobe_psm)

    @pytest.mark.parametrize("seed", range(200))
    def test_random_round_trip(self, seed):
        """Test that export and import are inverse on exportable models."""
        model = random_psm_model(seed)
        data = export_bpmn(model)

        assert import_bpmn(data, model.stage) == (model, [])
        assert validate_bpmn_schema(data) == []

    def test_unsupported_element(self):
        """Test that a sub-process is skipped with a warning."""
        data = MINIMAL.replace(
            '<endEvent id="e"/>', '<endEvent id="e"/>\n    <subProcess id="inner"/>'
        )
        model, diagnostics = import_bpmn(data)
        assert [(d.code, d.is_error) for d in diagnostics] == [("IO-UNSUPPORTED", False)]
        assert "subProcess 'inner'" in diagnostics[0].message
        assert len(model.pool("Shop").nodes) == 3

    def test_timer_definition(self):
        """Test that a timer start is imported as a plain start with a warning."""
        data = MINIMAL.replace(
            '<startEvent id="s"/>', '<startEvent id="s"><timerEventDefinition/></startEvent>'
        )
        model, diagnostics = import_bpmn(data)
        assert [d.code for d in diagnostics] == ["IO-UNSUPPORTED"]
        assert model.pool("Shop").node("s").kind is NodeKind.START_NONE

    def test_dangling_flow(self):
        """Test a flow whose endpoint was skipped."""
        data = MINIMAL.replace('targetRef="e"', 'targetRef="gone"')
        model, diagnostics = import_bpmn(data)
        assert [d.code for d in diagnostics] == ["IO-DANGLING-FLOW"]
        assert len(model.pool("Shop").sequence_flows) == 1

    def test_plain_task(self):
        """Test that an untyped task imports as Unspecified."""
        model, _ = import_bpmn(MINIMAL.replace("userTask", "task"))
        assert model.pool("Shop").node("take").execution_kind is ExecutionKind.UNSPECIFIED

    def test_wrong_namespace(self):
        """Test that a non-BPMN root is rejected."""
        with pytest.raises(BpmnError):
            import_bpmn(MINIMAL.replace(BPMN_NS, "http://example.com/not-bpmn"))

    def test_malformed_xml(self):
        """Test that broken XML is rejected."""
        with pytest.raises(BpmnError):
            import_bpmn(b"<definitions")
