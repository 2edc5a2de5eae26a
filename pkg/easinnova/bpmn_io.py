"""BPMN 2.0 XML export and import for PSM process models."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import xmlschema
from lxml import etree

from . import __version__
from .diagnostics import Diagnostic, sort_diagnostics, warning
from .errors import BpmnError, PreconditionError
from .matrix import CellId, Layer, Stage
from .process import (
    ExecutionKind,
    Maturity,
    MessageFlow,
    Node,
    NodeKind,
    Pool,
    ProcessModel,
    SequenceFlow,
    check_executable,
    validate_structure,
)

log = logging.getLogger(__name__)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
CAMUNDA_NS = "http://camunda.org/schema/1.0/bpmn"
TARGET_NS = "urn:easinnova:export"
BUNDLED_XSD = Path(__file__).parent / "xsd" / "bpmn20-subset.xsd"
VENDORS = ("camunda",)

BpmnDocument = bytes

TASK_TAGS = {
    ExecutionKind.USER: "userTask",
    ExecutionKind.MANUAL_PASS_THROUGH: "manualTask",
    ExecutionKind.AUTOMATIC: "serviceTask",
    ExecutionKind.UNSPECIFIED: "task",
}
EVENT_TAGS = {
    NodeKind.START_NONE: "startEvent",
    NodeKind.START_MESSAGE: "startEvent",
    NodeKind.END: "endEvent",
    NodeKind.CATCH_MESSAGE: "intermediateCatchEvent",
    NodeKind.THROW_MESSAGE: "intermediateThrowEvent",
    NodeKind.XOR_GATEWAY: "exclusiveGateway",
    NodeKind.AND_GATEWAY: "parallelGateway",
}
MESSAGE_KINDS = (NodeKind.START_MESSAGE, NodeKind.CATCH_MESSAGE, NodeKind.THROW_MESSAGE)

# Elements that carry metadata only; accepted without a diagnostic
IGNORED = {"documentation", "extensionElements", "incoming", "outgoing"}


def _q(tag: str) -> str:
    return f"{{{BPMN_NS}}}{tag}"


def _local(tag: str) -> str:
    return etree.QName(tag).localname


def _sub(parent: etree._Element, tag: str, **attrs: str | None) -> etree._Element:
    element = etree.SubElement(parent, _q(tag))
    for key, value in attrs.items():
        if value is not None:
            element.set(key, value)
    return element


def node_ref(pool: str, node: str) -> str:
    return f"{pool}__{node}"


def participant_ref(pool: str) -> str:
    return f"participant__{pool}"


def _export_pool(
    definitions: etree._Element, pool: Pool, vendor: str | None
) -> None:
    process = _sub(
        definitions, "process",
        id=f"process__{pool.name}", name=pool.name, isExecutable="true",
    )
    if pool.lanes:
        lane_set = _sub(process, "laneSet", id=f"{pool.name}__laneset")
        for lane in pool.lanes:
            lane_el = _sub(lane_set, "lane", id=f"{pool.name}__lane__{lane}", name=lane)
            for node in pool.nodes:
                if node.lane == lane:
                    _sub(lane_el, "flowNodeRef").text = node_ref(pool.name, node.id)

    for node in pool.nodes:
        if node.kind is NodeKind.TASK:
            tag = TASK_TAGS[node.execution_kind]
        else:
            tag = EVENT_TAGS[node.kind]
        default = None
        if node.kind is NodeKind.XOR_GATEWAY:
            default = next(
                (node_ref(pool.name, f.id) for f in pool.outgoing(node.id) if f.default), None
            )
        element = _sub(process, tag, id=node_ref(pool.name, node.id), name=node.name, default=default)
        if vendor == "camunda" and tag == "serviceTask":
            element.set(f"{{{CAMUNDA_NS}}}type", "external")
            element.set(f"{{{CAMUNDA_NS}}}topic", node.label)
        for flow in pool.incoming(node.id):
            _sub(element, "incoming").text = node_ref(pool.name, flow.id)
        for flow in pool.outgoing(node.id):
            _sub(element, "outgoing").text = node_ref(pool.name, flow.id)
        if node.kind in MESSAGE_KINDS:
            _sub(element, "messageEventDefinition")

    for flow in pool.sequence_flows:
        element = _sub(
            process, "sequenceFlow",
            id=node_ref(pool.name, flow.id),
            sourceRef=node_ref(pool.name, flow.source),
            targetRef=node_ref(pool.name, flow.target),
        )
        if flow.condition:
            _sub(element, "conditionExpression").text = flow.condition


def export_bpmn(model: ProcessModel, vendor: str | None = None) -> BpmnDocument:
    """Serialize a PSM model to BPMN 2.0 XML.

    Output is byte-deterministic: element and attribute order follow the
    model, ids are derived from model ids, and nothing time-dependent is
    written.

    Args:
        model: PSM-maturity model.
        vendor: Optional engine hint set; only "camunda" is known.

    Returns:
        UTF-8 encoded document.

    Raises:
        PreconditionError: PIM model, untyped tasks, undecidable XOR
            splits, or ids that cannot become XML ids.
        ValueError: unknown vendor.
    """
    if vendor is not None and vendor not in VENDORS:
        raise ValueError(f"Unknown vendor: {vendor}")
    problems = [d for d in check_executable(model) if d.is_error]
    problems += [d for d in validate_structure(model) if d.code in ("PROC-BAD-ID", "PROC-DUP-ID")]
    if problems:
        details = "; ".join(d.message for d in problems)
        raise PreconditionError(f"Model is not exportable: {details}")

    nsmap = {"bpmn": BPMN_NS}
    if vendor == "camunda":
        nsmap["camunda"] = CAMUNDA_NS
    definitions = etree.Element(_q("definitions"), nsmap=nsmap)
    for key, value in (
        ("id", f"definitions__{model.stage.name.lower()}"),
        ("name", f"{model.stage.label} collaboration"),
        ("targetNamespace", TARGET_NS),
        ("exporter", "easinnova"),
        ("exporterVersion", __version__),
    ):
        definitions.set(key, value)

    collaboration = _sub(definitions, "collaboration", id="collaboration")
    for pool in model.pools:
        _sub(
            collaboration, "participant",
            id=participant_ref(pool.name), name=pool.actor_name, processRef=f"process__{pool.name}",
        )
    for name in model.black_box_participants():
        _sub(collaboration, "participant", id=participant_ref(name), name=name)
    for flow in model.message_flows:
        source = node_ref(flow.source_pool, flow.source) if flow.source else participant_ref(flow.source_pool)
        target = node_ref(flow.target_pool, flow.target) if flow.target else participant_ref(flow.target_pool)
        _sub(
            collaboration, "messageFlow",
            id=f"message__{flow.id}", name=flow.name, sourceRef=source, targetRef=target,
        )

    for pool in model.pools:
        _export_pool(definitions, pool, vendor)

    data = etree.tostring(definitions, xml_declaration=True, encoding="UTF-8", pretty_print=True)
    log.debug(f"Exported {model.stage.label} model: {len(model.pools)} pools, {len(data)} bytes")
    return data


@lru_cache(maxsize=4)
def _load_schema(path: str) -> xmlschema.XMLSchema:
    log.debug(f"Loading BPMN schema {path}")
    return xmlschema.XMLSchema(path)


def validate_bpmn_schema(data: BpmnDocument, schema_path: Path | str | None = None) -> list[str]:
    """Validate a document against a BPMN 2.0 XSD.

    Args:
        data: Document bytes.
        schema_path: XSD to use; the bundled subset schema by default.

    Returns:
        One message per schema violation; empty when valid.
    """
    schema = _load_schema(str(schema_path or BUNDLED_XSD))
    return [
        f"{e.path or '/'}: {e.reason or e.message}"
        for e in schema.iter_errors(io.BytesIO(data))
    ]


@dataclass
class _Importer:
    stage: Stage
    diagnostics: list[Diagnostic] = field(default_factory=list)
    # xml id -> (pool name, node id or None for a whole participant)
    refs: dict[str, tuple[str, str | None]] = field(default_factory=dict)

    @property
    def cell(self) -> CellId:
        return CellId(Layer.PSM, self.stage)

    def warn(self, code: str, message: str) -> None:
        self.diagnostics.append(warning(code, self.cell, f"{self.cell.path}/process", message))

    def unsupported(self, element: etree._Element, where: str) -> None:
        name = _local(element.tag)
        ident = element.get("id")
        label = f"{name} '{ident}'" if ident else name
        self.warn("IO-UNSUPPORTED", f"{label} in {where} is not supported; skipped")

    def node_kind(self, element: etree._Element, where: str) -> tuple[NodeKind, ExecutionKind] | None:
        tag = _local(element.tag)
        definitions = [c for c in element if isinstance(c.tag, str) and _local(c.tag).endswith("EventDefinition")]
        has_message = any(_local(c.tag) == "messageEventDefinition" for c in definitions)
        for extra in definitions:
            if _local(extra.tag) != "messageEventDefinition":
                self.unsupported(extra, where)

        for kind, task_tag in TASK_TAGS.items():
            if tag == task_tag:
                return NodeKind.TASK, kind
        if tag == "startEvent":
            return (NodeKind.START_MESSAGE if has_message else NodeKind.START_NONE), ExecutionKind.UNSPECIFIED
        if tag == "endEvent":
            return NodeKind.END, ExecutionKind.UNSPECIFIED
        if tag == "intermediateCatchEvent":
            if not has_message:
                return None
            return NodeKind.CATCH_MESSAGE, ExecutionKind.UNSPECIFIED
        if tag == "intermediateThrowEvent":
            return NodeKind.THROW_MESSAGE, ExecutionKind.UNSPECIFIED
        if tag == "exclusiveGateway":
            return NodeKind.XOR_GATEWAY, ExecutionKind.UNSPECIFIED
        if tag == "parallelGateway":
            return NodeKind.AND_GATEWAY, ExecutionKind.UNSPECIFIED
        return None

    def read_process(self, process: etree._Element, actors: dict[str, str]) -> Pool:
        process_id = process.get("id", "")
        name = process.get("name") or process_id.removeprefix("process__")
        where = f"process '{name}'"
        prefix = f"{name}__"

        lanes: list[str] = []
        lane_of: dict[str, str] = {}
        nodes: list[tuple[str, Node]] = []
        raw_flows: list[etree._Element] = []
        defaults: set[str] = set()

        for child in process:
            if not isinstance(child.tag, str):
                continue
            tag = _local(child.tag)
            if child.tag == _q("laneSet"):
                for lane in child:
                    if not isinstance(lane.tag, str) or lane.tag != _q("lane"):
                        if isinstance(lane.tag, str) and _local(lane.tag) not in IGNORED:
                            self.unsupported(lane, where)
                        continue
                    lane_name = lane.get("name") or lane.get("id", "").removeprefix(f"{name}__lane__")
                    lanes.append(lane_name)
                    for ref in lane:
                        if not isinstance(ref.tag, str) or _local(ref.tag) in IGNORED:
                            continue
                        if ref.tag == _q("flowNodeRef"):
                            lane_of[(ref.text or "").strip()] = lane_name
                        else:
                            self.unsupported(ref, where)
                continue
            if child.tag == _q("sequenceFlow"):
                raw_flows.append(child)
                continue
            if tag in IGNORED:
                continue
            kind = self.node_kind(child, where) if child.tag.startswith(f"{{{BPMN_NS}}}") else None
            if kind is None:
                self.unsupported(child, where)
                continue
            xml_id = child.get("id", "")
            node_id = xml_id.removeprefix(prefix)
            if child.get("default"):
                defaults.add(child.get("default", ""))
            nodes.append((xml_id, Node(id=node_id, kind=kind[0], name=child.get("name"),
                                       execution_kind=kind[1])))
            self.refs[xml_id] = (name, node_id)

        flows = []
        for element in raw_flows:
            xml_id = element.get("id", "")
            source = self.refs.get(_strip_qname(element.get("sourceRef", "")))
            target = self.refs.get(_strip_qname(element.get("targetRef", "")))
            if any(end is None or end[0] != name or end[1] is None for end in (source, target)):
                self.warn("IO-DANGLING-FLOW",
                          f"sequence flow '{xml_id}' in {where} connects elements that were not imported")
                continue
            condition = None
            for child in element:
                if isinstance(child.tag, str) and child.tag == _q("conditionExpression"):
                    condition = (child.text or "").strip() or None
            flows.append(
                SequenceFlow(
                    id=xml_id.removeprefix(prefix),
                    source=source[1],
                    target=target[1],
                    condition=condition,
                    default=xml_id in defaults,
                )
            )

        actor = actors.get(process_id)
        return Pool(
            name=name,
            actor=None if actor in (None, name) else actor,
            lanes=tuple(lanes),
            nodes=tuple(replace(node, lane=lane_of.get(xml_id)) for xml_id, node in nodes),
            sequence_flows=tuple(flows),
        )


def _strip_qname(value: str) -> str:
    return value.strip().rpartition(":")[2]


def import_bpmn(
    data: BpmnDocument | str, stage: Stage = Stage.TOBE
) -> tuple[ProcessModel, list[Diagnostic]]:
    """Parse BPMN 2.0 XML back into a PSM model.

    Elements outside the supported subset are skipped, each with an
    IO-UNSUPPORTED warning.

    Raises:
        BpmnError: malformed XML, or a root other than BPMN 2.0 definitions.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = etree.XMLParser(resolve_entities=False, no_network=True, remove_comments=True)
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as e:
        raise BpmnError(f"malformed XML: {e}") from e
    if root.tag != _q("definitions"):
        raise BpmnError(f"not a BPMN 2.0 document: root element is {root.tag}")

    importer = _Importer(stage)
    collaborations = []
    processes = []
    for child in root:
        if not isinstance(child.tag, str):
            continue
        if child.tag == _q("collaboration"):
            collaborations.append(child)
        elif child.tag == _q("process"):
            processes.append(child)
        elif _local(child.tag) not in IGNORED:
            importer.unsupported(child, "definitions")

    # processRef -> participant name; participant id -> pool name
    actors: dict[str, str] = {}
    participant_pools: dict[str, str] = {}
    message_elements = []
    process_names = {p.get("id", ""): p.get("name") or p.get("id", "").removeprefix("process__") for p in processes}
    for collaboration in collaborations:
        for child in collaboration:
            if not isinstance(child.tag, str) or _local(child.tag) in IGNORED:
                continue
            if child.tag == _q("participant"):
                process_ref = _strip_qname(child.get("processRef", ""))
                participant_name = child.get("name") or child.get("id", "").removeprefix("participant__")
                if process_ref in process_names:
                    actors[process_ref] = participant_name
                    participant_pools[child.get("id", "")] = process_names[process_ref]
                else:
                    participant_pools[child.get("id", "")] = participant_name
            elif child.tag == _q("messageFlow"):
                message_elements.append(child)
            else:
                importer.unsupported(child, "collaboration")

    pools = tuple(importer.read_process(p, actors) for p in processes)
    for participant_id, pool_name in participant_pools.items():
        importer.refs.setdefault(participant_id, (pool_name, None))

    message_flows = []
    for element in message_elements:
        xml_id = element.get("id", "")
        source = importer.refs.get(_strip_qname(element.get("sourceRef", "")))
        target = importer.refs.get(_strip_qname(element.get("targetRef", "")))
        if source is None or target is None:
            importer.warn("IO-DANGLING-FLOW", f"message flow '{xml_id}' connects elements that were not imported")
            continue
        message_flows.append(
            MessageFlow(
                id=xml_id.removeprefix("message__"),
                source_pool=source[0],
                source=source[1],
                target_pool=target[0],
                target=target[1],
                name=element.get("name"),
            )
        )

    model = ProcessModel(
        stage=stage,
        maturity=Maturity.PSM,
        pools=pools,
        message_flows=tuple(message_flows),
    )
    log.debug(f"Imported {len(pools)} pools, {len(message_flows)} message flows")
    return model, sort_diagnostics(importer.diagnostics)
