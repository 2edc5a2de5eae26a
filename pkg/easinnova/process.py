"""BPMN-subset process models: construction, validation and PSM enrichment."""

from __future__ import annotations

import json
import logging
import re
from collections import Counter, defaultdict, deque
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, replace
from enum import Enum

from .diagnostics import Diagnostic, error, sort_diagnostics, warning
from .documents import PROCESS_SCHEMA, validate
from .errors import ArtifactError, PreconditionError
from .matrix import CellId, Layer, Stage

log = logging.getLogger(__name__)

# Ids end up in XML id attributes joined by "__", so they stay within
# NCName and use underscores only singly and between other characters.
ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9.-]*(?:_[A-Za-z0-9.-]+)*$")
# Prefixes of the fixed BPMN ids, and the lane set id inside a pool
RESERVED_POOL_NAMES = frozenset({"definitions", "participant", "process", "message"})
RESERVED_IDS = frozenset({"laneset"})


class NodeKind(Enum):
    START_NONE = "StartNone"
    START_MESSAGE = "StartMessage"
    END = "End"
    TASK = "Task"
    XOR_GATEWAY = "XorGateway"
    AND_GATEWAY = "AndGateway"
    CATCH_MESSAGE = "CatchMessage"
    THROW_MESSAGE = "ThrowMessage"

    @property
    def is_start(self) -> bool:
        return self in (NodeKind.START_NONE, NodeKind.START_MESSAGE)

    @property
    def is_gateway(self) -> bool:
        return self in (NodeKind.XOR_GATEWAY, NodeKind.AND_GATEWAY)


MESSAGE_SOURCES = (NodeKind.THROW_MESSAGE, NodeKind.TASK, NodeKind.END)
MESSAGE_TARGETS = (NodeKind.CATCH_MESSAGE, NodeKind.START_MESSAGE, NodeKind.TASK)


class ExecutionKind(Enum):
    UNSPECIFIED = "Unspecified"
    USER = "User"
    MANUAL_PASS_THROUGH = "ManualPassThrough"
    AUTOMATIC = "Automatic"


class Maturity(Enum):
    PIM = "PIM"
    PSM = "PSM"


CRUDA_OPS = "CRUDA"


@dataclass(frozen=True)
class Effect:
    object: str
    op: str  # one of C, R, U, D, A


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    name: str | None = None
    lane: str | None = None
    execution_kind: ExecutionKind = ExecutionKind.UNSPECIFIED
    effects: tuple[Effect, ...] = ()

    @property
    def label(self) -> str:
        return self.name or self.id


@dataclass(frozen=True)
class SequenceFlow:
    id: str
    source: str
    target: str
    condition: str | None = None
    default: bool = False


@dataclass(frozen=True)
class Pool:
    name: str
    actor: str | None = None  # None = same as name
    lanes: tuple[str, ...] = ()
    nodes: tuple[Node, ...] = ()
    sequence_flows: tuple[SequenceFlow, ...] = ()

    @property
    def actor_name(self) -> str:
        return self.actor or self.name

    def node(self, node_id: str) -> Node | None:
        for node in self.nodes:
            if node.id == node_id:
                return node
        return None

    def outgoing(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.sequence_flows if f.source == node_id]

    def incoming(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.sequence_flows if f.target == node_id]


@dataclass(frozen=True)
class MessageFlow:
    """A message between two pools.

    A pool name that is not modelled stands for a black-box participant;
    the node reference on that side is then None.
    """

    id: str
    source_pool: str
    source: str | None
    target_pool: str
    target: str | None
    name: str | None = None


@dataclass(frozen=True)
class ProcessModel:
    stage: Stage
    maturity: Maturity
    pools: tuple[Pool, ...] = ()
    message_flows: tuple[MessageFlow, ...] = ()

    @property
    def cell(self) -> CellId:
        layer = Layer.PIM if self.maturity is Maturity.PIM else Layer.PSM
        return CellId(layer, self.stage)

    @property
    def subject(self) -> str:
        return f"{self.cell.path}/process"

    def pool(self, name: str) -> Pool | None:
        for pool in self.pools:
            if pool.name == name:
                return pool
        return None

    def tasks(self) -> Iterator[tuple[Pool, Node]]:
        for pool in self.pools:
            for node in pool.nodes:
                if node.kind is NodeKind.TASK:
                    yield pool, node

    def black_box_participants(self) -> list[str]:
        """Message-flow participants that are not modelled as pools."""
        modelled = {p.name for p in self.pools}
        names = set()
        for flow in self.message_flows:
            names.update(n for n in (flow.source_pool, flow.target_pool) if n not in modelled)
        return sorted(names)

    def names_used(self) -> set[str]:
        """Every lexicon-facing name: actors, lanes, task names, effect objects."""
        names: set[str] = set()
        for pool in self.pools:
            names.add(pool.actor_name)
            names.update(pool.lanes)
            for node in pool.nodes:
                if node.kind is NodeKind.TASK:
                    names.add(node.label)
                names.update(e.object for e in node.effects)
        return names


def parse_process(document: dict | str, source: str | None = None) -> ProcessModel:
    """Build a ProcessModel from its JSON document.

    Raises:
        ArtifactError: invalid JSON or envelope.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ArtifactError(f"invalid JSON at line {e.lineno}: {e.msg}", source) from e
    validate(document, PROCESS_SCHEMA, source)

    pools = []
    for pool_data in document.get("pools", []):
        actor = pool_data.get("actor")
        nodes = tuple(
            Node(
                id=n["id"],
                kind=NodeKind(n["kind"]),
                name=n.get("name"),
                lane=n.get("lane"),
                execution_kind=ExecutionKind(n.get("execution_kind", "Unspecified")),
                effects=tuple(Effect(e["object"], e["op"]) for e in n.get("effects", [])),
            )
            for n in pool_data.get("nodes", [])
        )
        flows = tuple(
            SequenceFlow(
                id=f["id"],
                source=f["source"],
                target=f["target"],
                condition=f.get("condition"),
                default=f.get("default", False),
            )
            for f in pool_data.get("sequence_flows", [])
        )
        pools.append(
            Pool(
                name=pool_data["name"],
                actor=None if actor == pool_data["name"] else actor,
                lanes=tuple(pool_data.get("lanes", [])),
                nodes=nodes,
                sequence_flows=flows,
            )
        )

    message_flows = tuple(
        MessageFlow(
            id=m["id"],
            source_pool=m["source_pool"],
            source=m.get("source"),
            target_pool=m["target_pool"],
            target=m.get("target"),
            name=m.get("name"),
        )
        for m in document.get("message_flows", [])
    )
    return ProcessModel(
        stage=Stage[document["stage"]],
        maturity=Maturity(document["maturity"]),
        pools=tuple(pools),
        message_flows=message_flows,
    )


def serialize_process(model: ProcessModel) -> dict:
    pools = []
    for pool in model.pools:
        nodes = []
        for node in pool.nodes:
            entry: dict = {"id": node.id, "kind": node.kind.value}
            if node.name is not None:
                entry["name"] = node.name
            if node.lane is not None:
                entry["lane"] = node.lane
            if node.kind is NodeKind.TASK:
                entry["execution_kind"] = node.execution_kind.value
            if node.effects:
                entry["effects"] = [{"object": e.object, "op": e.op} for e in node.effects]
            nodes.append(entry)
        flows = []
        for flow in pool.sequence_flows:
            entry = {"id": flow.id, "source": flow.source, "target": flow.target}
            if flow.condition is not None:
                entry["condition"] = flow.condition
            if flow.default:
                entry["default"] = True
            flows.append(entry)
        pool_entry: dict = {"name": pool.name}
        if pool.actor is not None:
            pool_entry["actor"] = pool.actor
        pool_entry.update({"lanes": list(pool.lanes), "nodes": nodes, "sequence_flows": flows})
        pools.append(pool_entry)
    return {
        "stage": model.stage.name,
        "maturity": model.maturity.value,
        "pools": pools,
        "message_flows": [
            {
                "id": m.id,
                "name": m.name,
                "source_pool": m.source_pool,
                "source": m.source,
                "target_pool": m.target_pool,
                "target": m.target,
            }
            for m in model.message_flows
        ],
    }


def _reachable(pool: Pool) -> set[str]:
    succ: dict[str, list[str]] = defaultdict(list)
    for flow in pool.sequence_flows:
        succ[flow.source].append(flow.target)
    seen = {n.id for n in pool.nodes if n.kind.is_start}
    queue = deque(sorted(seen))
    while queue:
        for target in succ[queue.popleft()]:
            if target not in seen:
                seen.add(target)
                queue.append(target)
    return seen


def _check_pool(model: ProcessModel, pool: Pool) -> list[Diagnostic]:
    cell, subject = model.cell, model.subject
    where = f"in pool '{pool.name}'"
    diagnostics = []

    def err(code: str, message: str) -> None:
        diagnostics.append(error(code, cell, subject, message))

    for item in [pool.name, *pool.lanes, *(n.id for n in pool.nodes), *(f.id for f in pool.sequence_flows)]:
        if not ID_RE.match(item):
            err("PROC-BAD-ID", f"'{item}' {where} is not a valid identifier")
    if pool.name in RESERVED_POOL_NAMES:
        err("PROC-BAD-ID", f"pool name '{pool.name}' is reserved")
    for item in sorted({n.id for n in pool.nodes} | {f.id for f in pool.sequence_flows}):
        if item in RESERVED_IDS:
            err("PROC-BAD-ID", f"id '{item}' {where} is reserved")
    id_counts = Counter([n.id for n in pool.nodes] + [f.id for f in pool.sequence_flows])
    for item, count in sorted(id_counts.items()):
        if count > 1:
            err("PROC-DUP-ID", f"id '{item}' used {count} times {where}")

    node_ids = {n.id for n in pool.nodes}
    foreign = {n.id for p in model.pools if p is not pool for n in p.nodes}
    for flow in pool.sequence_flows:
        for end in (flow.source, flow.target):
            if end in node_ids:
                continue
            if end in foreign:
                err("PROC-XPOOL-SEQ", f"sequence flow '{flow.id}' {where} reaches '{end}' in another pool")
            else:
                err("PROC-FLOW-ENDPOINT", f"sequence flow '{flow.id}' {where} references unknown node '{end}'")

    for node in pool.nodes:
        incoming = pool.incoming(node.id)
        outgoing = pool.outgoing(node.id)
        if node.kind.is_start and incoming:
            err("PROC-START-INCOMING", f"start event '{node.id}' {where} has incoming sequence flows")
        if node.kind is NodeKind.END and outgoing:
            err("PROC-END-OUTGOING", f"end event '{node.id}' {where} has outgoing sequence flows")
        if node.kind is not NodeKind.END and not outgoing:
            err("PROC-DANGLING", f"node '{node.id}' {where} has no outgoing sequence flow")
        if node.kind.is_gateway and len(incoming) < 2 and len(outgoing) < 2:
            err("PROC-GW-DEGREE", f"gateway '{node.id}' {where} neither splits nor joins")
        if node.lane is not None and node.lane not in pool.lanes:
            err("PROC-LANE-UNKNOWN", f"node '{node.id}' {where} sits in undeclared lane '{node.lane}'")
        if node.kind is NodeKind.XOR_GATEWAY and sum(f.default for f in outgoing) > 1:
            err("PROC-DEFAULTS", f"gateway '{node.id}' {where} marks several default flows")
        if node.kind is not NodeKind.XOR_GATEWAY and any(f.condition or f.default for f in outgoing):
            diagnostics.append(
                warning("PROC-COND-MISPLACED", cell, subject,
                        f"flows leaving '{node.id}' {where} carry conditions but it is not an XOR split")
            )

    if not any(n.kind.is_start for n in pool.nodes):
        err("PROC-NOSTART", f"pool '{pool.name}' has no start event")
    if not any(n.kind is NodeKind.END for n in pool.nodes):
        err("PROC-NOEND", f"pool '{pool.name}' has no end event")

    reachable = _reachable(pool)
    for node in pool.nodes:
        if node.id not in reachable and any(n.kind.is_start for n in pool.nodes):
            err("PROC-DANGLING", f"node '{node.id}' {where} is not reachable from a start event")
    return diagnostics


def _check_message_flows(model: ProcessModel) -> list[Diagnostic]:
    cell, subject = model.cell, model.subject
    diagnostics = []
    pools = {p.name: p for p in model.pools}

    def err(code: str, message: str) -> None:
        diagnostics.append(error(code, cell, subject, message))

    for item, count in sorted(Counter(m.id for m in model.message_flows).items()):
        if count > 1:
            err("PROC-DUP-ID", f"message flow id '{item}' used {count} times")
    for item, count in sorted(Counter(p.name for p in model.pools).items()):
        if count > 1:
            err("PROC-DUP-ID", f"pool name '{item}' used {count} times")

    for flow in model.message_flows:
        if not ID_RE.match(flow.id):
            err("PROC-BAD-ID", f"'{flow.id}' is not a valid message flow identifier")
        for participant in (flow.source_pool, flow.target_pool):
            if participant not in pools and not ID_RE.match(participant):
                err("PROC-BAD-ID", f"participant '{participant}' of message flow '{flow.id}' is not a valid identifier")
        if flow.source_pool == flow.target_pool:
            err("PROC-MSG-SAMEPOOL", f"message flow '{flow.id}' stays inside pool '{flow.source_pool}'")
            continue
        if flow.source_pool not in pools and flow.target_pool not in pools:
            err("PROC-MSG-ENDPOINT", f"message flow '{flow.id}' connects two participants that are not modelled")
            continue
        ends = (
            (flow.source_pool, flow.source, MESSAGE_SOURCES, "source"),
            (flow.target_pool, flow.target, MESSAGE_TARGETS, "target"),
        )
        for pool_name, node_id, allowed, side in ends:
            pool = pools.get(pool_name)
            if pool is None:
                if node_id is not None:
                    err("PROC-MSG-ENDPOINT",
                        f"message flow '{flow.id}' names node '{node_id}' in unmodelled participant '{pool_name}'")
                continue
            node = pool.node(node_id) if node_id is not None else None
            if node is None:
                err("PROC-MSG-ENDPOINT",
                    f"message flow '{flow.id}' {side} '{node_id}' is not a node of pool '{pool_name}'")
            elif node.kind not in allowed:
                err("PROC-MSG-KIND",
                    f"message flow '{flow.id}' cannot have a {node.kind.value} as its {side}")

    for pool in model.pools:
        for node in pool.nodes:
            if node.kind in (NodeKind.START_MESSAGE, NodeKind.CATCH_MESSAGE):
                if not any(m.target_pool == pool.name and m.target == node.id for m in model.message_flows):
                    diagnostics.append(
                        warning("PROC-MSG-NOSENDER", cell, subject,
                                f"'{node.id}' in pool '{pool.name}' waits for a message nobody sends")
                    )
            if node.kind is NodeKind.THROW_MESSAGE:
                if not any(m.source_pool == pool.name and m.source == node.id for m in model.message_flows):
                    diagnostics.append(
                        warning("PROC-MSG-UNUSED", cell, subject,
                                f"'{node.id}' in pool '{pool.name}' throws a message no flow carries")
                    )
    return diagnostics


def validate_structure(model: ProcessModel) -> list[Diagnostic]:
    """Structural well-formedness of every pool and message flow."""
    diagnostics = []
    for pool in model.pools:
        diagnostics.extend(_check_pool(model, pool))
    diagnostics.extend(_check_message_flows(model))
    return sort_diagnostics(diagnostics)


def _locate(model: ProcessModel, key: str) -> tuple[Pool, Node]:
    if "/" in key:
        pool_name, _, node_id = key.partition("/")
        pool = model.pool(pool_name)
        node = pool.node(node_id) if pool else None
        if pool is None or node is None:
            raise PreconditionError(f"Annotation target not found: {key}")
        return pool, node
    matches = [(p, n) for p in model.pools for n in p.nodes if n.id == key]
    if not matches:
        raise PreconditionError(f"Annotation target not found: {key}")
    if len(matches) > 1:
        raise PreconditionError(f"Annotation target '{key}' is ambiguous; use Pool/{key}")
    return matches[0]


def enrich_to_psm(
    model: ProcessModel, annotations: Mapping[str, ExecutionKind | str]
) -> ProcessModel:
    """Apply execution kinds to tasks and lift the model to PSM maturity.

    Args:
        model: PIM-maturity model.
        annotations: Node id, or "Pool/node id", to execution kind.

    Returns:
        A PSM copy with identical topology.

    Raises:
        PreconditionError: wrong maturity, or a key that does not name
            exactly one task.
    """
    if model.maturity is not Maturity.PIM:
        raise PreconditionError(f"enrich_to_psm needs a PIM model, got {model.maturity.value}")

    kinds: dict[tuple[str, str], ExecutionKind] = {}
    for key, kind in annotations.items():
        pool, node = _locate(model, key)
        if node.kind is not NodeKind.TASK:
            raise PreconditionError(f"Annotation target '{key}' is a {node.kind.value}, not a Task")
        kinds[(pool.name, node.id)] = ExecutionKind(kind)

    pools = tuple(
        replace(
            pool,
            nodes=tuple(
                replace(node, execution_kind=kinds[(pool.name, node.id)])
                if (pool.name, node.id) in kinds else node
                for node in pool.nodes
            ),
        )
        for pool in model.pools
    )
    log.info(f"Enriched {model.stage.label} model: {len(kinds)} tasks annotated")
    return replace(model, maturity=Maturity.PSM, pools=pools)


def check_executable(model: ProcessModel) -> list[Diagnostic]:
    """Every task typed and every XOR split decidable.

    Raises:
        PreconditionError: the model is not at PSM maturity.
    """
    if model.maturity is not Maturity.PSM:
        raise PreconditionError(f"check_executable needs a PSM model, got {model.maturity.value}")
    cell, subject = model.cell, model.subject
    diagnostics = []
    for pool, node in model.tasks():
        if node.execution_kind is ExecutionKind.UNSPECIFIED:
            diagnostics.append(
                error("PSM-UNTYPED", cell, subject,
                      f"task '{node.label}' in pool '{pool.name}' has no execution kind")
            )
    for pool in model.pools:
        for node in pool.nodes:
            if node.kind is not NodeKind.XOR_GATEWAY:
                # BPMN carries the default flag on XOR gateways only
                for flow in pool.outgoing(node.id):
                    if flow.default:
                        diagnostics.append(
                            error("PSM-DEFAULT-MISPLACED", cell, subject,
                                  f"default flow '{flow.id}' in pool '{pool.name}' leaves "
                                  f"'{node.id}', which is not an XOR split")
                        )
                continue
            outgoing = pool.outgoing(node.id)
            if len(outgoing) < 2:
                continue
            if not any(f.default for f in outgoing) and not all(f.condition for f in outgoing):
                diagnostics.append(
                    error("PSM-XOR-NOCOND", cell, subject,
                          f"XOR split '{node.id}' in pool '{pool.name}' needs a default flow "
                          f"or conditions on every branch")
                )
    return sort_diagnostics(diagnostics)
