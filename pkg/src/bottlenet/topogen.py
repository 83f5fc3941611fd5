"""Random topology generators for the three studied network shapes."""

from __future__ import annotations

import random

from .errors import InvalidCount
from .network import Topology
from .oracle import components

KINDS = ("generic", "sparse-partitioned", "dense")

_MAX_ATTEMPTS = 100_000


def _sample_edges(n: int, p: float, rng: random.Random) -> Topology:
    t = Topology(nodes=set(range(n)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                t.add_edge(a, b)
    return t


def _is_connected(t: Topology) -> bool:
    return len(components(t)) == 1


def _min_degree(t: Topology) -> int:
    return min(len(t.live_neighbors(n)) for n in t.nodes)


def generate_topology(kind: str, n: int, seed: int) -> Topology:
    """Deterministic random graph of the requested character.

    generic: mean degree about 3, resampled until connected.
    sparse-partitioned: mean degree about 2, no connectivity repair.
    dense: mean degree about n/2, connected with no weakly attached nodes.
    """
    if kind not in KINDS:
        raise InvalidCount(f"unknown topology kind {kind!r}; expected one of {KINDS}")
    if n < 2:
        raise InvalidCount(f"need at least 2 nodes, got {n}")
    rng = random.Random(f"{kind}:{n}:{seed}")
    if kind == "sparse-partitioned":
        return _sample_edges(n, 2 / (n - 1), rng)
    if kind == "generic":
        p, accept = 3 / (n - 1), _is_connected
    else:
        p = (n / 2) / (n - 1)
        accept = lambda t: _is_connected(t) and _min_degree(t) >= n // 4
    for _ in range(_MAX_ATTEMPTS):
        t = _sample_edges(n, p, rng)
        if accept(t):
            return t
    raise InvalidCount(f"could not generate a {kind} graph with {n} nodes")
