"""Per-node protocol logic: state transitions, discovery, bottle handling.

Every handler takes the node's state, mutates it in place, and returns the
list of actions for the engine to carry out. Handlers never touch the
topology or the clock beyond the arguments they are given, which keeps
them testable without a running simulation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from .domain import (
    Bottle,
    BottleId,
    DataPacket,
    NodeId,
    NodePhase,
    NodeState,
    PendingRequest,
    RouteEntry,
    RoutingTable,
    bottle_hops,
    check_bottle,
    make_bottle,
)
from .config import ProtocolConfig
from .errors import MalformedBottle, PreconditionViolation


class ElimReason(Enum):
    HOP_LIMIT = "hop_limit"
    DEAD_END = "dead_end"


@dataclass(frozen=True)
class Send:
    bottle: Bottle
    to: NodeId


@dataclass(frozen=True)
class SendData:
    packet: DataPacket
    to: NodeId


@dataclass(frozen=True)
class Eliminate:
    btl_id: BottleId
    reason: ElimReason


@dataclass(frozen=True)
class SetTimer:
    btl_id: BottleId
    deadline: int


@dataclass(frozen=True)
class DeclareInaccessible:
    dest: NodeId


@dataclass(frozen=True)
class TableUpdated:
    dest: NodeId
    entry: RouteEntry


Action = Union[Send, SendData, Eliminate, SetTimer, DeclareInaccessible, TableUpdated]


def next_state(current: NodePhase, pkt_queue_empty: bool,
               btl_queue_empty: bool) -> NodePhase:
    """Total transition function over the three states and two queue flags.

    Bottle management wins when both queues hold work; servicing in-flight
    discoveries spreads routing knowledge network-wide.
    """
    if not btl_queue_empty:
        return NodePhase.BTL_MANAGE
    if not pkt_queue_empty:
        return NodePhase.ROUTE_REQ
    return NodePhase.IDLE


def choose_next_hop(nbors: set[NodeId], history: Sequence[NodeId],
                    rng: random.Random) -> NodeId | None:
    """Uniform pick among neighbors the bottle has not visited; None at a dead end."""
    candidates = sorted(set(nbors) - set(history))
    if not candidates:
        return None
    return rng.choice(candidates)


def update_table_from_history(rtab: RoutingTable, history: Sequence[NodeId],
                              self_id: NodeId, nbors: set[NodeId],
                              ) -> tuple[RoutingTable, list[TableUpdated]]:
    """Harvest routes to every other node on a bottle's travel history.

    Looking from this node's position in the history, earlier entries are
    reachable through the previous hop and (on a return traversal) later
    entries through the next hop. An entry is installed only when the
    destination is new or the harvested hop count strictly improves on the
    existing one; ties keep what is already there.
    """
    try:
        i = history.index(self_id)
    except ValueError:
        raise PreconditionViolation(
            f"node {self_id} not on history {list(history)}") from None
    table = dict(rtab)
    updates: list[TableUpdated] = []

    def consider(dest: NodeId, via: NodeId, hops: int) -> None:
        current = table.get(dest)
        if current is None or hops < current.hop_count:
            entry = RouteEntry(next_hop=via, hop_count=hops)
            table[dest] = entry
            updates.append(TableUpdated(dest, entry))

    if i > 0 and history[i - 1] in nbors:
        for j in range(i):
            consider(history[j], history[i - 1], i - j)
    if i + 1 < len(history) and history[i + 1] in nbors:
        for j in range(i + 1, len(history)):
            consider(history[j], history[i + 1], j - i)
    return table, updates


def _start_discovery(node: NodeState, dest: NodeId, now: int,
                     cfg: ProtocolConfig, rng: random.Random,
                     queued: list[DataPacket], retries_used: int = 0,
                     ) -> list[Action]:
    """Create a bottle for dest, launch it, and arm the request timer."""
    bottle = make_bottle(node.nid, dest, node.next_seq())
    deadline = now + cfg.timeout
    node.pending[bottle.btl_id] = PendingRequest(
        dest=dest, retries_used=retries_used, deadline=deadline,
        queued_packets=queued)
    hop = choose_next_hop(node.nbors, bottle.history, rng)
    actions: list[Action]
    if hop is None:
        # Nowhere to launch: the bottle dies on the spot, the timer still
        # drives the retry/inaccessible path.
        actions = [Eliminate(bottle.btl_id, ElimReason.DEAD_END)]
    else:
        actions = [Send(bottle, hop)]
    actions.append(SetTimer(bottle.btl_id, deadline))
    return actions


def _pending_for_dest(node: NodeState, dest: NodeId,
                      ) -> tuple[BottleId, PendingRequest] | None:
    for btl_id, req in node.pending.items():
        if req.dest == dest:
            return btl_id, req
    return None


def _failure_report(node: NodeState, pkt: DataPacket) -> list[Action]:
    """Bottle carrying a route-failure mark back along the packet's path."""
    path = _loop_erased(pkt.path)
    if len(path) < 2 or path[-1] != node.nid:
        return []
    bottle = Bottle(src=pkt.src, dest=pkt.dest,
                    btl_id=BottleId(node.nid, node.next_seq()),
                    rf=False, history=path, failure=True)
    prev = path[-2]
    if prev not in node.nbors:
        return []
    return [Send(bottle, prev)]


def _loop_erased(path: Sequence[NodeId]) -> list[NodeId]:
    out: list[NodeId] = []
    for n in path:
        if n in out:
            del out[out.index(n) + 1:]
        else:
            out.append(n)
    return out


def handle_route_request(node: NodeState, pkt: DataPacket, now: int,
                         cfg: ProtocolConfig, rng: random.Random,
                         ) -> list[Action]:
    """Service one packet: forward from the table or start a discovery."""
    if pkt.dest == node.nid:
        return []
    entry = node.rtab.get(pkt.dest)
    if entry is not None:
        return [SendData(pkt, entry.next_hop)]
    open_request = _pending_for_dest(node, pkt.dest)
    if open_request is not None:
        _, req = open_request
        if len(req.queued_packets) >= cfg.queue_cap:
            if pkt.src != node.nid:
                return _failure_report(node, pkt)
            return []
        req.queued_packets.append(pkt)
        return []
    return _start_discovery(node, pkt.dest, now, cfg, rng, queued=[pkt])


def handle_bottle(node: NodeState, b: Bottle, now: int,
                  cfg: ProtocolConfig, rng: random.Random) -> list[Action]:
    """The three bottle-management tasks: harvest, regulate, forward."""
    check_bottle(b)
    forward = not b.rf and not b.failure
    if forward:
        if node.nid in b.history:
            raise MalformedBottle(
                f"bottle {b.btl_id} revisited node {node.nid}")
        b.history.append(node.nid)
    elif node.nid not in b.history:
        raise MalformedBottle(
            f"returning bottle {b.btl_id} at node {node.nid} off its history")

    node.rtab, actions = update_table_from_history(
        node.rtab, b.history, node.nid, node.nbors)
    actions = list(actions)

    if forward and bottle_hops(b) >= cfg.hop_limit:
        actions.append(Eliminate(b.btl_id, ElimReason.HOP_LIMIT))
        return actions

    if forward and node.nid == b.dest:
        b.rf = True
        prev = b.history[-2]
        if prev in node.nbors:
            actions.append(Send(b, prev))
        return actions

    if not forward:
        i = b.history.index(node.nid)
        if i == 0:
            if b.rf:
                actions.extend(_complete_discovery(node, b, now, cfg, rng))
            else:
                actions.extend(_handle_route_failure(node, b, now, cfg, rng))
            return actions
        prev = b.history[i - 1]
        if prev in node.nbors:
            actions.append(Send(b, prev))
        return actions

    hop = choose_next_hop(node.nbors, b.history, rng)
    if hop is None:
        actions.append(Eliminate(b.btl_id, ElimReason.DEAD_END))
    else:
        actions.append(Send(b, hop))
    return actions


def _complete_discovery(node: NodeState, b: Bottle, now: int,
                        cfg: ProtocolConfig, rng: random.Random,
                        ) -> list[Action]:
    """A found-route bottle is home: flush waiting packets, drop the timer.

    Matched by destination rather than bottle id so that a slow bottle
    from an earlier attempt still completes a request that has since been
    retried under a fresh id.
    """
    actions: list[Action] = []
    open_request = _pending_for_dest(node, b.dest)
    if open_request is None:
        return actions
    btl_id, req = open_request
    del node.pending[btl_id]
    entry = node.rtab.get(b.dest)
    for pkt in req.queued_packets:
        if entry is not None:
            actions.append(SendData(pkt, entry.next_hop))
        else:
            # Route did not install (previous hop no longer a neighbor);
            # go around again with the packet still queued.
            actions.extend(handle_route_request(node, pkt, now, cfg, rng))
    return actions


def _handle_route_failure(node: NodeState, b: Bottle, now: int,
                          cfg: ProtocolConfig, rng: random.Random,
                          ) -> list[Action]:
    """Route-failure bottle reached the packet's source: purge and retry."""
    node.rtab.pop(b.dest, None)
    if _pending_for_dest(node, b.dest) is not None:
        return []
    return _start_discovery(node, b.dest, now, cfg, rng, queued=[])


def on_timeout(node: NodeState, btl_id: BottleId, now: int,
               cfg: ProtocolConfig, rng: random.Random) -> list[Action]:
    """Request timer fired: retry with a fresh bottle or give up."""
    req = node.pending.pop(btl_id, None)
    if req is None:
        return []  # stale timer, the bottle already came back
    entry = node.rtab.get(req.dest)
    if entry is not None:
        # Route learned passively from another bottle while waiting.
        return [SendData(pkt, entry.next_hop) for pkt in req.queued_packets]
    if req.retries_used < cfg.retry_limit:
        return _start_discovery(node, req.dest, now, cfg, rng,
                                queued=req.queued_packets,
                                retries_used=req.retries_used + 1)
    return [DeclareInaccessible(req.dest)]


def on_delivery_failure(node: NodeState, item: Bottle | DataPacket,
                        failed_neighbor: NodeId, now: int,
                        cfg: ProtocolConfig, rng: random.Random,
                        ) -> list[Action]:
    """A send bounced: the neighbor (or the link to it) is gone.

    Every route through the dead neighbor is purged. A data packet we were
    forwarding for someone else triggers a route-failure bottle back along
    its recorded path; our own packet restarts discovery on the spot.
    Bottles are simply lost, the source timer recovers.
    """
    node.nbors.discard(failed_neighbor)
    node.rtab = {dest: entry for dest, entry in node.rtab.items()
                 if entry.next_hop != failed_neighbor}
    if not isinstance(item, DataPacket):
        return []
    if item.src == node.nid:
        item.path = [node.nid]
        return handle_route_request(node, item, now, cfg, rng)
    return _failure_report(node, item)
