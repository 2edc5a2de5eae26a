"""Token-game simulation of process models.

A marking places at most one token on each position. Positions are
``(pool, node id)`` pairs, except that a token travelling into a
synchronising AND gateway waits on ``(pool, "flow:<flow id>")`` until
every input of the join is occupied. Message flows act as capacity-1
channels.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import PreconditionError
from .process import MessageFlow, Node, NodeKind, Pool, ProcessModel, validate_structure

log = logging.getLogger(__name__)

FLOW_PREFIX = "flow:"


class SimOutcome(Enum):
    PROPER_COMPLETION = "ProperCompletion"
    DEADLOCK = "Deadlock"
    BOUND_EXCEEDED = "BoundExceeded"
    UNSAFE_MARKING = "UnsafeMarking"


@dataclass(frozen=True)
class SimConfig:
    max_states: int = 100000
    suspended_pools: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Marking:
    """One state of the token game."""

    tokens: frozenset[tuple[str, str]] = frozenset()
    channels: frozenset[str] = frozenset()  # pending message flow ids
    active: frozenset[str] = frozenset()
    ended: frozenset[str] = frozenset()

    @property
    def is_empty(self) -> bool:
        return not self.tokens and not self.channels

    @property
    def is_proper(self) -> bool:
        """No token or message stranded and every activated pool ended."""
        return self.is_empty and self.active <= self.ended

    def describe(self) -> str:
        parts = sorted(f"{pool}/{pos}" for pool, pos in self.tokens)
        parts += sorted(f"msg:{m}" for m in self.channels)
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Event:
    """A firing: a node, optionally along one XOR branch or consuming one message."""

    pool: str
    node: str
    flow: str | None = None
    message: str | None = None

    def __str__(self) -> str:
        text = f"{self.pool}/{self.node}"
        if self.flow is not None:
            text += f"[{self.flow}]"
        if self.message is not None:
            text += f"<{self.message}"
        return text

    @property
    def sort_key(self) -> tuple[str, str, str, str]:
        return (self.pool, self.node, self.flow or "", self.message or "")


@dataclass(frozen=True)
class Step:
    event: Event
    marking: Marking
    unsafe: bool = False


@dataclass(frozen=True)
class SimReport:
    outcome: SimOutcome
    states_explored: int
    reached_nodes: tuple[str, ...] = ()
    witness: tuple[Event, ...] | None = None
    # pools that reach an End in every terminal marking
    completed_pools: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "states_explored": self.states_explored,
            "reached_nodes": list(self.reached_nodes),
            "witness": [str(e) for e in self.witness] if self.witness is not None else None,
            "completed_pools": list(self.completed_pools),
        }

    def render(self) -> str:
        lines = [
            f"Outcome: {self.outcome.value}",
            f"States explored: {self.states_explored}",
            f"Nodes reached: {len(self.reached_nodes)}",
        ]
        if self.completed_pools:
            lines.append(f"Pools always completing: {', '.join(self.completed_pools)}")
        if self.witness is not None:
            lines.append("Witness:")
            lines.extend(f"  {i + 1}. {event}" for i, event in enumerate(self.witness))
        return "\n".join(lines) + "\n"


class TokenGame:
    """Firing rules of a process model, independent of any search strategy."""

    def __init__(self, model: ProcessModel, config: SimConfig | None = None):
        self.model = model
        self.config = config or SimConfig()
        self.pools: dict[str, Pool] = {p.name: p for p in model.pools}
        self._sends: dict[tuple[str, str], list[MessageFlow]] = defaultdict(list)
        self._receives: dict[tuple[str, str], list[MessageFlow]] = defaultdict(list)
        for flow in model.message_flows:
            # Black-box participants are not simulated
            if flow.source_pool in self.pools and flow.target_pool in self.pools:
                self._sends[(flow.source_pool, flow.source or "")].append(flow)
                self._receives[(flow.target_pool, flow.target or "")].append(flow)

    def _is_join(self, pool: Pool, node: Node) -> bool:
        return node.kind is NodeKind.AND_GATEWAY and len(pool.incoming(node.id)) >= 2

    def initial(self) -> Marking:
        tokens = set()
        active = set()
        for pool in self.model.pools:
            for node in pool.nodes:
                if node.kind is NodeKind.START_NONE:
                    tokens.add((pool.name, node.id))
                    active.add(pool.name)
        return Marking(tokens=frozenset(tokens), active=frozenset(active))

    def _emit(
        self, pool: Pool, node: Node, flows: list, tokens: set, channels: set, ended: set
    ) -> bool:
        """Send the node's messages and place tokens downstream. False on a 1-safety violation."""
        safe = True
        for message in self._sends[(pool.name, node.id)]:
            if message.id in channels:
                safe = False
            channels.add(message.id)
        if node.kind is NodeKind.END:
            ended.add(pool.name)
        for flow in flows:
            target = pool.node(flow.target)
            if target is not None and self._is_join(pool, target):
                position = (pool.name, FLOW_PREFIX + flow.id)
            else:
                position = (pool.name, flow.target)
            if position in tokens:
                safe = False
            tokens.add(position)
        return safe

    def _fire(
        self, marking: Marking, event: Event, pool: Pool, node: Node,
        consumed: list[tuple[str, str]], flows: list,
    ) -> Step:
        tokens = set(marking.tokens) - set(consumed)
        channels = set(marking.channels)
        active = set(marking.active)
        ended = set(marking.ended)
        if event.message is not None:
            channels.discard(event.message)
            active.add(pool.name)
        safe = self._emit(pool, node, flows, tokens, channels, ended)
        return Step(
            event,
            Marking(frozenset(tokens), frozenset(channels), frozenset(active), frozenset(ended)),
            unsafe=not safe,
        )

    def _node_steps(self, marking: Marking, pool: Pool, node: Node, consumed: list) -> list[Step]:
        outgoing = pool.outgoing(node.id)
        receives = self._receives[(pool.name, node.id)]
        if node.kind is NodeKind.CATCH_MESSAGE or (node.kind is NodeKind.TASK and receives):
            messages: list[str | None] = sorted(m.id for m in receives if m.id in marking.channels)
        else:
            messages = [None]
        branches: list[list] = (
            [[f] for f in outgoing]
            if node.kind is NodeKind.XOR_GATEWAY and len(outgoing) >= 2
            else [outgoing]
        )
        steps = []
        for message in messages:
            for flows in branches:
                flow_id = flows[0].id if len(branches) > 1 else None
                event = Event(pool.name, node.id, flow_id, message)
                steps.append(self._fire(marking, event, pool, node, consumed, flows))
        return steps

    def successors(self, marking: Marking) -> list[Step]:
        """All enabled firings of a marking, sorted by event."""
        suspended = self.config.suspended_pools
        steps: list[Step] = []
        for pool_name, position in sorted(marking.tokens):
            if pool_name in suspended or position.startswith(FLOW_PREFIX):
                continue
            pool = self.pools[pool_name]
            node = pool.node(position)
            if node is None:
                continue
            steps.extend(self._node_steps(marking, pool, node, [(pool_name, position)]))

        for pool in self.model.pools:
            if pool.name in suspended:
                continue
            for node in pool.nodes:
                if self._is_join(pool, node):
                    inputs = [(pool.name, FLOW_PREFIX + f.id) for f in pool.incoming(node.id)]
                    if all(i in marking.tokens for i in inputs):
                        steps.extend(self._node_steps(marking, pool, node, inputs))
                elif node.kind is NodeKind.START_MESSAGE and pool.name not in marking.active:
                    for message in sorted(self._receives[(pool.name, node.id)], key=lambda m: m.id):
                        if message.id in marking.channels:
                            event = Event(pool.name, node.id, None, message.id)
                            steps.append(
                                self._fire(marking, event, pool, node, [], pool.outgoing(node.id))
                            )
        return sorted(steps, key=lambda s: s.event.sort_key)


def _check_structure(model: ProcessModel) -> None:
    errors = [d for d in validate_structure(model) if d.is_error]
    if errors:
        raise PreconditionError(
            f"Model is not structurally valid ({len(errors)} errors): {errors[0].message}"
        )


def _path(parents: dict[Marking, tuple[Marking, Event] | None], marking: Marking) -> tuple[Event, ...]:
    events = []
    entry = parents[marking]
    while entry is not None:
        previous, event = entry
        events.append(event)
        entry = parents[previous]
    return tuple(reversed(events))


def _reached(parents: dict) -> tuple[str, ...]:
    reached = set()
    for marking, entry in parents.items():
        reached.update(
            f"{pool}/{pos}" for pool, pos in marking.tokens if not pos.startswith(FLOW_PREFIX)
        )
        if entry is not None:
            reached.add(f"{entry[1].pool}/{entry[1].node}")
    return tuple(sorted(reached))


def explore(model: ProcessModel, config: SimConfig | None = None) -> SimReport:
    """Breadth-first exploration of every reachable marking.

    Args:
        model: Structurally valid model at either maturity.
        config: Exploration bound and suspended pools.

    Returns:
        The outcome with a witness trace for anything but proper completion.

    Raises:
        PreconditionError: validate_structure reports errors.
    """
    _check_structure(model)
    config = config or SimConfig()
    game = TokenGame(model, config)

    start = game.initial()
    parents: dict[Marking, tuple[Marking, Event] | None] = {start: None}
    edges: dict[Marking, list[Marking]] = defaultdict(list)
    terminals: list[Marking] = []
    queue = deque([start])

    while queue:
        marking = queue.popleft()
        steps = game.successors(marking)
        if not steps:
            terminals.append(marking)
        for step in steps:
            if step.unsafe:
                log.debug(f"Unsafe marking after {len(parents)} states: {step.marking.describe()}")
                return SimReport(
                    SimOutcome.UNSAFE_MARKING,
                    len(parents),
                    _reached(parents),
                    (*_path(parents, marking), step.event),
                )
            edges[marking].append(step.marking)
            if step.marking in parents:
                continue
            parents[step.marking] = (marking, step.event)
            if len(parents) > config.max_states:
                log.debug(f"State bound {config.max_states} exceeded")
                return SimReport(SimOutcome.BOUND_EXCEEDED, len(parents), _reached(parents))
            queue.append(step.marking)

    log.debug(f"Explored {len(parents)} states, {len(terminals)} terminal")
    reached = _reached(parents)
    completed = tuple(sorted(
        frozenset.intersection(*(t.ended for t in terminals)) if terminals else frozenset()
    ))

    for terminal in terminals:
        if not terminal.is_proper:
            return SimReport(
                SimOutcome.DEADLOCK, len(parents), reached, _path(parents, terminal), completed
            )

    # Every marking must still be able to finish
    predecessors: dict[Marking, list[Marking]] = defaultdict(list)
    for source, targets in edges.items():
        for target in targets:
            predecessors[target].append(source)
    can_finish = set(terminals)
    pending = deque(terminals)
    while pending:
        for source in predecessors[pending.popleft()]:
            if source not in can_finish:
                can_finish.add(source)
                pending.append(source)
    for marking in parents:
        if marking not in can_finish:
            return SimReport(
                SimOutcome.DEADLOCK, len(parents), reached, _path(parents, marking), completed
            )

    return SimReport(SimOutcome.PROPER_COMPLETION, len(parents), reached, None, completed)


def random_trace(
    model: ProcessModel, seed: int, max_steps: int = 1000, config: SimConfig | None = None
) -> list[Event]:
    """One execution, choosing among enabled firings with a seeded generator.

    Raises:
        PreconditionError: validate_structure reports errors.
    """
    _check_structure(model)
    game = TokenGame(model, config)
    rng = random.Random(seed)
    marking = game.initial()
    trace: list[Event] = []
    for _ in range(max_steps):
        steps = game.successors(marking)
        if not steps:
            break
        step = steps[0] if len(steps) == 1 else rng.choice(steps)
        trace.append(step.event)
        if step.unsafe:
            break
        marking = step.marking
    return trace


def replay(model: ProcessModel, trace: list[Event], config: SimConfig | None = None) -> bool:
    """True when every event of the trace is an enabled firing in turn."""
    game = TokenGame(model, config)
    marking = game.initial()
    for event in trace:
        match = next((s for s in game.successors(marking) if s.event == event), None)
        if match is None:
            return False
        marking = match.marking
    return True


@dataclass
class TraceReport:
    seed: int
    events: list[Event] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "events": [str(e) for e in self.events]}

    def render(self) -> str:
        lines = [f"Trace (seed {self.seed}, {len(self.events)} events):"]
        lines.extend(f"  {i + 1}. {event}" for i, event in enumerate(self.events))
        return "\n".join(lines) + "\n"
