"""Pytest configuration and shared fixtures."""

import json
import random
import shutil
import tempfile
from collections.abc import Callable
from pathlib import Path

import pytest

from easinnova.matrix import Stage
from easinnova.process import (
    ExecutionKind,
    Maturity,
    MessageFlow,
    Node,
    NodeKind,
    Pool,
    ProcessModel,
    SequenceFlow,
    parse_process,
)
from easinnova.project import Project

FIXTURES = Path(__file__).parent / "fixtures"
PIZZALOVE = FIXTURES / "pizzalove"


def read_fixture(relative: str) -> dict:
    """Parsed JSON of a file under tests/fixtures."""
    with open(FIXTURES / relative, encoding="utf-8") as f:
        return json.load(f)


def edit_json(path: Path, edit: Callable[[dict], None]) -> None:
    """Apply an in-place edit to a JSON artifact."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    edit(data)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)


def find(items: list[dict], **match) -> dict:
    """First dict whose keys equal ``match``."""
    return next(i for i in items if all(i.get(k) == v for k, v in match.items()))


@pytest.fixture
def pizzalove_dir(tmp_path):
    """Writable copy of the PizzaLove project."""
    target = tmp_path / "pizzalove"
    shutil.copytree(PIZZALOVE, target)
    return target


@pytest.fixture
def project(pizzalove_dir):
    """The clean PizzaLove project, loaded."""
    return Project.load(pizzalove_dir)


@pytest.fixture
def tobe_pim():
    return parse_process(read_fixture("pizzalove/pim/tobe/process.json"))


@pytest.fixture
def tobe_psm():
    return parse_process(read_fixture("pizzalove/psm/tobe/process.json"))


@pytest.fixture
def asis_pim():
    return parse_process(read_fixture("pizzalove/pim/asis/process.json"))


@pytest.fixture
def deadlock_model():
    return parse_process(read_fixture("xor_and_deadlock.json"))


@pytest.fixture
def temp_config_file():
    """Create a temporary config file."""
    with tempfile.NamedTemporaryFile(mode="w", suffix=".yaml", delete=False) as f:
        config = """
project:
  path: "/srv/innovation/pizzalove"

output:
  format: "json"

simulation:
  max_states: 5000
  trace_steps: 200

export:
  vendor: "camunda"
"""
        f.write(config)
        f.flush()
        yield Path(f.name)


def sequential_model(tasks: int = 1, maturity: Maturity = Maturity.PIM) -> ProcessModel:
    """One pool: start, ``tasks`` tasks in a row, end."""
    ids = ["start", *(f"t{i}" for i in range(tasks)), "end"]
    nodes = [Node("start", NodeKind.START_NONE)]
    nodes += [
        Node(f"t{i}", NodeKind.TASK, f"Task{i}", execution_kind=ExecutionKind.USER)
        for i in range(tasks)
    ]
    nodes.append(Node("end", NodeKind.END))
    flows = [SequenceFlow(f"f{i}", a, b) for i, (a, b) in enumerate(zip(ids, ids[1:]))]
    return ProcessModel(
        Stage.TOBE, maturity, pools=(Pool("Solo", nodes=tuple(nodes), sequence_flows=tuple(flows)),)
    )


TYPED = [k for k in ExecutionKind if k is not ExecutionKind.UNSPECIFIED]
FREE_KINDS = [
    NodeKind.START_NONE,
    NodeKind.START_MESSAGE,
    NodeKind.END,
    NodeKind.TASK,
    NodeKind.TASK,
    NodeKind.XOR_GATEWAY,
    NodeKind.AND_GATEWAY,
    NodeKind.CATCH_MESSAGE,
    NodeKind.THROW_MESSAGE,
]


def random_psm_model(seed: int) -> ProcessModel:
    """A seeded, exportable PSM model over the supported node kinds.

    Topology is arbitrary; only what the exporter requires is enforced:
    valid unique ids, typed tasks and decidable XOR splits.
    """
    rng = random.Random(seed)
    pools = []
    for p in range(rng.randint(1, 3)):
        name = rng.choice([f"P{p}", f"P_{p}", f"Pool_{p}_x"])
        lanes = tuple(rng.choice([f"L{i}", f"Lane_{i}"]) for i in range(rng.randint(0, 2)))
        nodes = []
        for i in range(rng.randint(1, 7)):
            kind = rng.choice(FREE_KINDS)
            nodes.append(
                Node(
                    id=rng.choice([f"n{i}", f"n_{i}", f"node_{i}_b"]),
                    kind=kind,
                    name=rng.choice([None, f"Node{p}x{i}"]),
                    lane=rng.choice([None, *lanes]),
                    execution_kind=rng.choice(TYPED) if kind is NodeKind.TASK else ExecutionKind.UNSPECIFIED,
                )
            )
        flows = []
        for i in range(rng.randint(0, 8)):
            source, target = rng.choice(nodes), rng.choice(nodes)
            flows.append(SequenceFlow(rng.choice([f"s{i}", f"flow_{i}"]), source.id, target.id))
        # XOR splits get a default or a condition on every branch
        for node in nodes:
            if node.kind is not NodeKind.XOR_GATEWAY:
                continue
            outgoing = [i for i, f in enumerate(flows) if f.source == node.id]
            if len(outgoing) < 2:
                continue
            if rng.random() < 0.5:
                flows[outgoing[0]] = SequenceFlow(
                    flows[outgoing[0]].id, node.id, flows[outgoing[0]].target, default=True
                )
            else:
                for j, index in enumerate(outgoing):
                    f = flows[index]
                    flows[index] = SequenceFlow(f.id, f.source, f.target, condition=f"x > {j}")
        actor = rng.choice([None, f"Actor{p}"])
        pools.append(Pool(name, actor, lanes, tuple(nodes), tuple(flows)))

    message_flows = []
    for i in range(rng.randint(0, 4)):
        source_pool = rng.choice(pools)
        if len(pools) > 1 and rng.random() < 0.7:
            target_pool = rng.choice([p for p in pools if p is not source_pool])
            target = rng.choice(target_pool.nodes).id
            target_name = target_pool.name
        else:
            target_name, target = rng.choice(["Partner", "Partner_0", "Partner_1"]), None
        message_flows.append(
            MessageFlow(
                id=rng.choice([f"m{i}", f"msg_{i}"]),
                source_pool=source_pool.name,
                source=rng.choice(source_pool.nodes).id,
                target_pool=target_name,
                target=target,
                name=rng.choice([None, f"Msg{i}"]),
            )
        )
    stage = rng.choice([Stage.ASIS, Stage.TOBE])
    return ProcessModel(stage, Maturity.PSM, tuple(pools), tuple(message_flows))
