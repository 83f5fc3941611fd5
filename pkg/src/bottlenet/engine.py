"""Deterministic discrete-event simulation loop.

All randomness flows from the scenario seed through per-node streams, and
events with equal timestamps are processed in scheduling order, so a given
(scenario, seed) pair always produces a byte-identical trace.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

from . import fsm
from .config import ProtocolConfig, ScenarioConfig
from .domain import (
    Bottle,
    BottleId,
    DataPacket,
    NodeState,
    serialize_bottle,
)
from .errors import ConfigError, UnknownEdge, UnknownNode
from .network import Topology, fail_link, fail_node, hello_tick, load_topology, restore_link, restore_node


class EventKind(Enum):
    BOTTLE_ARRIVAL = "bottle_arrival"
    DATA_ARRIVAL = "data_arrival"
    TIMER_FIRE = "timer_fire"
    BEACON_TICK = "beacon_tick"
    FAULT_INJECTION = "fault_injection"
    APP_REQUEST = "app_request"


@dataclass(frozen=True)
class Event:
    at: int
    kind: EventKind
    payload: tuple
    seq: int


@dataclass(frozen=True)
class TraceEvent:
    at: int
    seq: int
    node: int
    kind: str
    data: dict[str, Any]

    def to_json(self) -> str:
        doc = {"at": self.at, "seq": self.seq, "node": self.node,
               "kind": self.kind, "data": self.data}
        return json.dumps(doc, separators=(",", ":"))


@dataclass
class Trace:
    """Everything a finished run produced, trace records first among equals."""

    events: list[TraceEvent] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    nodes: dict[int, NodeState] = field(default_factory=dict)
    topology: Topology | None = None
    cfg: ProtocolConfig | None = None

    def records(self, kind: str) -> list[TraceEvent]:
        return [ev for ev in self.events if ev.kind == kind]

    def to_jsonl(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.events)

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def load_trace(path: str) -> Trace:
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            events.append(TraceEvent(at=doc["at"], seq=doc["seq"],
                                     node=doc["node"], kind=doc["kind"],
                                     data=doc["data"]))
    return Trace(events=events)


class Engine:
    """Event queue, per-node rng streams, and the action-to-event bridge."""

    def __init__(self, topology: Topology, cfg: ProtocolConfig, seed: int,
                 horizon: int):
        self.topology = topology
        self.cfg = cfg
        self.seed = seed
        self.horizon = horizon
        self.now = 0
        self.nodes = {nid: NodeState(nid=nid, nbors=topology.live_neighbors(nid))
                      for nid in sorted(topology.nodes)}
        self._rngs = {nid: random.Random(f"{seed}:{nid}")
                      for nid in self.nodes}
        self._queue: list[tuple[int, int, Event]] = []
        self._event_seq = 0
        self._trace_seq = 0
        self._xfer = 0
        self.trace: list[TraceEvent] = []
        self.bottle_bytes_sent = 0
        self.events_processed = 0

    # -- scheduling --------------------------------------------------------

    def schedule(self, at: int, kind: EventKind, payload: tuple) -> None:
        if at < self.now:
            raise ConfigError(f"cannot schedule event at {at}, now is {self.now}")
        ev = Event(at=at, kind=kind, payload=payload, seq=self._event_seq)
        self._event_seq += 1
        heapq.heappush(self._queue, (at, ev.seq, ev))

    # -- trace -------------------------------------------------------------

    def _record(self, node: int, kind: str, data: dict[str, Any]) -> None:
        self.trace.append(TraceEvent(at=self.now, seq=self._trace_seq,
                                     node=node, kind=kind, data=data))
        self._trace_seq += 1

    # -- main loop ---------------------------------------------------------

    def run(self) -> None:
        while self._queue and self._queue[0][0] <= self.horizon:
            _, _, ev = heapq.heappop(self._queue)
            self.now = ev.at
            self.events_processed += 1
            self._dispatch(ev)

    def _dispatch(self, ev: Event) -> None:
        handler = {
            EventKind.APP_REQUEST: self._on_app_request,
            EventKind.BOTTLE_ARRIVAL: self._on_bottle_arrival,
            EventKind.DATA_ARRIVAL: self._on_data_arrival,
            EventKind.TIMER_FIRE: self._on_timer_fire,
            EventKind.BEACON_TICK: self._on_beacon_tick,
            EventKind.FAULT_INJECTION: self._on_fault,
        }[ev.kind]
        handler(*ev.payload)

    # -- event handlers ----------------------------------------------------

    def _on_app_request(self, src: int, dest: int, payload_len: int) -> None:
        if src in self.topology.down_nodes:
            return
        pkt = DataPacket(src=src, dest=dest, payload_len=payload_len, path=[src])
        self.nodes[src].pkt_queue.append(pkt)
        self._drain(src)

    def _on_bottle_arrival(self, frm: int, to: int, bottle: Bottle,
                           xfer: int) -> None:
        if not self.topology.link_live(frm, to):
            self._fail_delivery(frm, to, bottle, xfer, "bottle")
            return
        self._record(to, "Received", {
            "msg": "bottle", "from": frm, "btl_id": str(bottle.btl_id),
            "src": bottle.src, "dest": bottle.dest, "rf": bottle.rf,
            "failure": bottle.failure, "history_len": len(bottle.history),
            "xfer": xfer,
        })
        if bottle.rf and to == bottle.src:
            self._record(to, "RouteFound", {
                "src": bottle.src, "dest": bottle.dest,
                "path": list(bottle.history),
            })
        self.nodes[to].btl_queue.append(bottle)
        self._drain(to)

    def _on_data_arrival(self, frm: int, to: int, pkt: DataPacket,
                         xfer: int) -> None:
        if not self.topology.link_live(frm, to):
            self._fail_delivery(frm, to, pkt, xfer, "data")
            return
        pkt.path.append(to)
        self._record(to, "Received", {
            "msg": "data", "from": frm, "src": pkt.src, "dest": pkt.dest,
            "path": list(pkt.path), "xfer": xfer,
        })
        if to == pkt.dest:
            return
        if len(pkt.path) > self.cfg.hop_limit + 1:
            # Stale tables can momentarily loop a packet; cap its journey.
            self._record(to, "DeliveryFailed", {
                "msg": "data", "src": pkt.src, "dest": pkt.dest,
                "reason": "hop_cap", "xfer": None,
            })
            return
        self.nodes[to].pkt_queue.append(pkt)
        self._drain(to)

    def _on_timer_fire(self, nid: int, btl_id: BottleId) -> None:
        if nid in self.topology.down_nodes:
            return
        node = self.nodes[nid]
        actions = fsm.on_timeout(node, btl_id, self.now, self.cfg,
                                 self._rngs[nid])
        self._apply(nid, actions)

    def _on_beacon_tick(self, nid: int) -> None:
        nxt = self.now + self.cfg.beacon_period
        if nxt <= self.horizon:
            self.schedule(nxt, EventKind.BEACON_TICK, (nid,))
        if nid in self.topology.down_nodes:
            return
        hello_tick(self.topology, self.nodes[nid])

    def _on_fault(self, op: str, target: tuple) -> None:
        try:
            if op == "fail_node":
                fail_node(self.topology, target[0])
            elif op == "restore_node":
                restore_node(self.topology, target[0])
            elif op == "fail_link":
                fail_link(self.topology, target[0], target[1])
            elif op == "restore_link":
                restore_link(self.topology, target[0], target[1])
        except (UnknownNode, UnknownEdge) as exc:
            raise ConfigError(f"fault injection: {exc}") from exc

    # -- node servicing ----------------------------------------------------

    def _drain(self, nid: int) -> None:
        node = self.nodes[nid]
        while True:
            node.state = fsm.next_state(node.state, not node.pkt_queue,
                                        not node.btl_queue)
            if node.state is fsm.NodePhase.BTL_MANAGE:
                bottle = node.btl_queue.pop(0)
                actions = fsm.handle_bottle(node, bottle, self.now, self.cfg,
                                            self._rngs[nid])
            elif node.state is fsm.NodePhase.ROUTE_REQ:
                pkt = node.pkt_queue.pop(0)
                actions = fsm.handle_route_request(node, pkt, self.now,
                                                   self.cfg, self._rngs[nid])
            else:
                break
            self._apply(nid, actions)

    def _apply(self, nid: int, actions: Sequence[fsm.Action]) -> None:
        for action in actions:
            if isinstance(action, fsm.Send):
                self._send_bottle(nid, action.bottle, action.to)
            elif isinstance(action, fsm.SendData):
                self._send_data(nid, action.packet, action.to)
            elif isinstance(action, fsm.Eliminate):
                data: dict[str, Any] = {"btl_id": str(action.btl_id),
                                        "reason": action.reason.value}
                pending = self.nodes[nid].pending.get(action.btl_id)
                if pending is not None:
                    data["dest"] = pending.dest
                self._record(nid, "Eliminated", data)
            elif isinstance(action, fsm.SetTimer):
                self.schedule(action.deadline, EventKind.TIMER_FIRE,
                              (nid, action.btl_id))
            elif isinstance(action, fsm.DeclareInaccessible):
                self._record(nid, "Inaccessible",
                             {"src": nid, "dest": action.dest})
            elif isinstance(action, fsm.TableUpdated):
                self._record(nid, "TableUpdated", {
                    "dest": action.dest, "next_hop": action.entry.next_hop,
                    "hops": action.entry.hop_count,
                })

    def _send_bottle(self, frm: int, bottle: Bottle, to: int) -> None:
        sent = bottle.clone()
        size = len(serialize_bottle(sent))
        self.bottle_bytes_sent += size
        xfer = self._xfer
        self._xfer += 1
        self._record(frm, "Sent", {
            "msg": "bottle", "to": to, "btl_id": str(sent.btl_id),
            "src": sent.src, "dest": sent.dest, "rf": sent.rf,
            "failure": sent.failure, "history_len": len(sent.history),
            "bytes": size, "xfer": xfer,
        })
        if self.topology.link_live(frm, to):
            self.schedule(self.now + self.cfg.per_hop_latency,
                          EventKind.BOTTLE_ARRIVAL, (frm, to, sent, xfer))
        else:
            self._fail_delivery(frm, to, sent, xfer, "bottle")

    def _send_data(self, frm: int, pkt: DataPacket, to: int) -> None:
        xfer = self._xfer
        self._xfer += 1
        self._record(frm, "Sent", {
            "msg": "data", "to": to, "src": pkt.src, "dest": pkt.dest,
            "xfer": xfer,
        })
        if self.topology.link_live(frm, to):
            self.schedule(self.now + self.cfg.per_hop_latency,
                          EventKind.DATA_ARRIVAL, (frm, to, pkt, xfer))
        else:
            self._fail_delivery(frm, to, pkt, xfer, "data")

    def _fail_delivery(self, frm: int, to: int, item: Bottle | DataPacket,
                       xfer: int, msg: str) -> None:
        self._record(frm, "DeliveryFailed", {"msg": msg, "to": to, "xfer": xfer})
        if frm in self.topology.down_nodes:
            return
        actions = fsm.on_delivery_failure(self.nodes[frm], item, to, self.now,
                                          self.cfg, self._rngs[frm])
        self._apply(frm, actions)


def _resolve_topology(scenario: ScenarioConfig) -> Topology:
    if scenario.topology_file is not None:
        return load_topology(scenario.topology_file)
    from .topogen import generate_topology

    gen = scenario.generator
    return generate_topology(gen["kind"], gen["nodes"], gen["seed"])


def request_schedule(scenario: ScenarioConfig, topology: Topology,
                     cfg: ProtocolConfig) -> list[tuple[int, int, int, int]]:
    """All (at, src, dest, payload_len) requests, explicit then random."""
    out = [(r.at, r.src, r.dest, r.payload_len) for r in scenario.requests]
    rr = scenario.random_requests
    if rr is not None:
        rng = random.Random(f"{scenario.seed}:requests")
        pool = sorted(topology.nodes)
        if len(pool) < 2:
            raise ConfigError("random_requests need at least two nodes")
        spacing = rr.spacing
        if spacing is None:
            spacing = (cfg.retry_limit + 1) * cfg.timeout + 2
        for i in range(rr.count):
            src, dest = rng.sample(pool, 2)
            out.append((rr.first_at + i * spacing, src, dest, 0))
    for at, src, dest, _ in out:
        if src not in topology.nodes:
            raise ConfigError(f"request at t={at}: unknown src node {src}")
        if dest not in topology.nodes:
            raise ConfigError(f"request at t={at}: unknown dest node {dest}")
    return out


def run(scenario: ScenarioConfig) -> Trace:
    """Execute one scenario to completion and return its full trace."""
    topology = _resolve_topology(scenario)
    cfg = scenario.protocol_for(len(topology.nodes))
    requests = request_schedule(scenario, topology, cfg)

    horizon = scenario.horizon
    if horizon is None:
        last_request = max((at for at, *_ in requests), default=0)
        settle = (cfg.retry_limit + 2) * cfg.timeout
        horizon = max(10_000, last_request + settle)

    engine = Engine(topology, cfg, scenario.seed, horizon)

    for at, src, dest, payload_len in requests:
        engine.schedule(at, EventKind.APP_REQUEST, (src, dest, payload_len))
    for fault in scenario.faults:
        target = (fault.node,) if fault.node is not None else fault.link
        engine.schedule(fault.at, EventKind.FAULT_INJECTION, (fault.op, target))
    if scenario.faults:
        # Beacons only matter when the topology can change under the nodes;
        # on a static topology they are a no-op and would just burn events.
        for nid in engine.nodes:
            engine.schedule(nid % cfg.beacon_period, EventKind.BEACON_TICK, (nid,))

    engine.run()

    return Trace(
        events=engine.trace,
        meta={
            "seed": scenario.seed,
            "horizon": horizon,
            "bottle_bytes_sent": engine.bottle_bytes_sent,
            "events_processed": engine.events_processed,
            "trace_records": len(engine.trace),
        },
        nodes=engine.nodes,
        topology=topology,
        cfg=cfg,
    )
