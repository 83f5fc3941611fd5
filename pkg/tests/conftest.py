import random

import pytest

from bottlenet.config import ProtocolConfig
from bottlenet.domain import NodeState
from bottlenet.network import Topology


def make_topology(*edges: tuple[int, int], extra_nodes: tuple[int, ...] = ()) -> Topology:
    t = Topology(nodes=set(extra_nodes))
    for a, b in edges:
        t.add_edge(a, b)
    return t


def make_node(nid: int, nbors: set[int] | None = None, **kwargs) -> NodeState:
    return NodeState(nid=nid, nbors=set(nbors or ()), **kwargs)


@pytest.fixture
def cfg() -> ProtocolConfig:
    return ProtocolConfig(hop_limit=60, timeout=120, retry_limit=3)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(42)


@pytest.fixture
def path3() -> Topology:
    return make_topology((0, 1), (1, 2))
