"""Ground-truth shortest paths and connectivity, recomputed from scratch.

Used only by tests and metrics as an independent check on what the
protocol discovers; deliberately shares nothing with the FSM.
"""

from __future__ import annotations

from collections import deque

from .errors import UnknownNode
from .network import Topology

Unreachable = None


def bfs_distance(t: Topology, a: int, b: int) -> int | None:
    """Hop count of a shortest live path from a to b; None when disconnected."""
    for n in (a, b):
        if n not in t.nodes:
            raise UnknownNode(f"node {n} not in topology")
    if a == b:
        return 0
    seen = {a}
    frontier = deque([(a, 0)])
    while frontier:
        node, dist = frontier.popleft()
        for m in t.live_neighbors(node):
            if m == b:
                return dist + 1
            if m not in seen:
                seen.add(m)
                frontier.append((m, dist + 1))
    return Unreachable


def connected(t: Topology, a: int, b: int) -> bool:
    return bfs_distance(t, a, b) is not Unreachable


def component(t: Topology, a: int) -> set[int]:
    """All nodes reachable from a over live links (includes a itself)."""
    if a not in t.nodes:
        raise UnknownNode(f"node {a} not in topology")
    seen = {a}
    frontier = deque([a])
    while frontier:
        node = frontier.popleft()
        for m in t.live_neighbors(node):
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    return seen


def components(t: Topology) -> list[set[int]]:
    """Connected components over live nodes, largest first."""
    remaining = {n for n in t.nodes if n not in t.down_nodes}
    out = []
    while remaining:
        comp = component(t, next(iter(sorted(remaining))))
        comp &= remaining
        out.append(comp)
        remaining -= comp
    return sorted(out, key=len, reverse=True)
