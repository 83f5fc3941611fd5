"""Undirected topology with link/node fault injection and hello beacons.

Links are bidirectional by construction and a failed node is modeled as
all of its incident links being down while its own state freezes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .domain import MAX_NODE_ID, NodeId, NodeState
from .errors import ConfigError, UnknownEdge, UnknownNode

Edge = tuple[NodeId, NodeId]


def edge_key(a: NodeId, b: NodeId) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass
class Topology:
    nodes: set[NodeId] = field(default_factory=set)
    edges: set[Edge] = field(default_factory=set)
    down_nodes: set[NodeId] = field(default_factory=set)
    down_edges: set[Edge] = field(default_factory=set)

    def add_edge(self, a: NodeId, b: NodeId) -> None:
        if a == b:
            raise ConfigError(f"self-loop at node {a}")
        self.nodes.add(a)
        self.nodes.add(b)
        self.edges.add(edge_key(a, b))

    def link_live(self, a: NodeId, b: NodeId) -> bool:
        key = edge_key(a, b)
        return (key in self.edges and key not in self.down_edges
                and a not in self.down_nodes and b not in self.down_nodes)

    def live_neighbors(self, n: NodeId) -> set[NodeId]:
        return {b if a == n else a
                for a, b in self.edges
                if n in (a, b) and self.link_live(a, b)}


def neighbors(t: Topology, n: NodeId) -> set[NodeId]:
    """Current live neighbor set of n; empty when n itself is down."""
    if n not in t.nodes:
        raise UnknownNode(f"node {n} not in topology")
    return t.live_neighbors(n)


def hello_tick(t: Topology, node: NodeState) -> NodeState:
    """Refresh a node's neighbor view from periodic hello beacons.

    Vanished neighbors take their routing entries with them; newly seen
    neighbors install nothing until someone actually routes (lazy
    reconnection).
    """
    fresh = neighbors(t, node.nid)
    vanished = node.nbors - fresh
    if vanished:
        node.rtab = {dest: entry for dest, entry in node.rtab.items()
                     if entry.next_hop not in vanished}
    node.nbors = fresh
    return node


def fail_node(t: Topology, n: NodeId) -> Topology:
    if n not in t.nodes:
        raise UnknownNode(f"node {n} not in topology")
    t.down_nodes.add(n)
    return t


def restore_node(t: Topology, n: NodeId) -> Topology:
    if n not in t.nodes:
        raise UnknownNode(f"node {n} not in topology")
    t.down_nodes.discard(n)
    return t


def fail_link(t: Topology, a: NodeId, b: NodeId) -> Topology:
    key = edge_key(a, b)
    if key not in t.edges:
        raise UnknownEdge(f"edge {key} not in topology")
    t.down_edges.add(key)
    return t


def restore_link(t: Topology, a: NodeId, b: NodeId) -> Topology:
    key = edge_key(a, b)
    if key not in t.edges:
        raise UnknownEdge(f"edge {key} not in topology")
    t.down_edges.discard(key)
    return t


def topology_from_dict(doc: dict, source: str = "<topology>") -> Topology:
    """Build a topology from {"nodes": [...], "edges": [[a, b], ...]}."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: expected an object with nodes/edges")
    for key in ("nodes", "edges"):
        if key not in doc:
            raise ConfigError(f"{source}: missing field '{key}'")
    t = Topology()
    seen_nodes: set[NodeId] = set()
    for n in doc["nodes"]:
        if not isinstance(n, int) or not 0 <= n <= MAX_NODE_ID:
            raise ConfigError(f"{source}: field 'nodes': bad node id {n!r}")
        if n in seen_nodes:
            raise ConfigError(f"{source}: field 'nodes': duplicate id {n}")
        seen_nodes.add(n)
    t.nodes = seen_nodes
    for pair in doc["edges"]:
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(x, int) for x in pair)):
            raise ConfigError(f"{source}: field 'edges': bad edge {pair!r}")
        a, b = pair
        if a == b:
            raise ConfigError(f"{source}: field 'edges': self-loop at {a}")
        if a not in t.nodes or b not in t.nodes:
            raise ConfigError(f"{source}: field 'edges': unknown endpoint in {pair!r}")
        key = edge_key(a, b)
        if key in t.edges:
            raise ConfigError(f"{source}: field 'edges': duplicate edge {pair!r}")
        t.edges.add(key)
    return t


def load_topology(path: str) -> Topology:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return topology_from_dict(doc, source=path)


def save_topology(t: Topology, path: str) -> None:
    doc = {"nodes": sorted(t.nodes), "edges": sorted(sorted(e) for e in t.edges)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
