"""Protocol data types and the bottle wire format.

Node identifiers are plain ints in the uint16 range. A bottle is the
route-request packet: it records every node it visits in ``history`` and
comes back marked ``rf`` once the destination was reached, or marked
``failure`` when a downstream delivery broke.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidRequest, MalformedBottle, WireOverflow

NodeId = int

MAX_NODE_ID = 0xFFFF
MAX_SEQ = 0xFFFF

# src(2) dest(2) origin(2) seq(2) flags(1) history_len(2)
_HEADER = struct.Struct(">HHHHBH")
HEADER_BYTES = _HEADER.size  # 11
_FLAG_RF = 0x01
_FLAG_FAILURE = 0x02


class NodePhase(Enum):
    """The three per-node FSM states."""

    IDLE = "idle"
    ROUTE_REQ = "route_req"
    BTL_MANAGE = "btl_manage"


@dataclass(frozen=True)
class BottleId:
    """Globally unique bottle identifier: originating node plus its counter."""

    origin: NodeId
    seq: int

    def __str__(self) -> str:
        return f"{self.origin}-{self.seq}"

    @classmethod
    def parse(cls, text: str) -> "BottleId":
        origin, _, seq = text.partition("-")
        return cls(int(origin), int(seq))


@dataclass
class Bottle:
    src: NodeId
    dest: NodeId
    btl_id: BottleId
    rf: bool = False
    history: list[NodeId] = field(default_factory=list)
    failure: bool = False

    def clone(self) -> "Bottle":
        """Independent copy; bottles are passed by value between nodes."""
        return Bottle(self.src, self.dest, self.btl_id, self.rf,
                      list(self.history), self.failure)


@dataclass(frozen=True)
class RouteEntry:
    next_hop: NodeId
    hop_count: int


# dest -> RouteEntry; the owning node's id is never a key.
RoutingTable = dict[NodeId, RouteEntry]


@dataclass
class DataPacket:
    """Application payload stand-in; only sizes and endpoints matter.

    ``path`` accumulates the nodes the packet actually traversed so a
    forwarding failure can be reported back along the recorded route.
    """

    src: NodeId
    dest: NodeId
    payload_len: int = 0
    path: list[NodeId] = field(default_factory=list)


@dataclass
class PendingRequest:
    """Bookkeeping for an outstanding discovery at its source."""

    dest: NodeId
    retries_used: int
    deadline: int
    queued_packets: list[DataPacket] = field(default_factory=list)


@dataclass
class NodeState:
    nid: NodeId
    bid: int = 0
    nbors: set[NodeId] = field(default_factory=set)
    rtab: RoutingTable = field(default_factory=dict)
    state: NodePhase = NodePhase.IDLE
    pkt_queue: list[DataPacket] = field(default_factory=list)
    btl_queue: list[Bottle] = field(default_factory=list)
    pending: dict[BottleId, PendingRequest] = field(default_factory=dict)

    def next_seq(self) -> int:
        """Consume the per-node bottle counter (wraps at 16 bits)."""
        seq = self.bid
        self.bid = (self.bid + 1) & MAX_SEQ
        return seq


def make_bottle(src: NodeId, dest: NodeId, seq: int) -> Bottle:
    """Fresh route-request bottle; its history starts at the source."""
    if src == dest:
        raise InvalidRequest(f"route to self needs no bottle (node {src})")
    return Bottle(src=src, dest=dest, btl_id=BottleId(src, seq), history=[src])


def bottle_hops(b: Bottle) -> int:
    return len(b.history) - 1


def check_bottle(b: Bottle) -> None:
    """Raise MalformedBottle unless all structural invariants hold."""
    if not b.history:
        raise MalformedBottle(f"bottle {b.btl_id}: empty history")
    if b.history[0] != b.src:
        raise MalformedBottle(f"bottle {b.btl_id}: history does not start at src")
    if len(set(b.history)) != len(b.history):
        raise MalformedBottle(f"bottle {b.btl_id}: revisited node in history")
    if b.failure and b.rf:
        raise MalformedBottle(f"bottle {b.btl_id}: rf and failure are exclusive")
    if b.rf and b.history[-1] != b.dest:
        raise MalformedBottle(f"bottle {b.btl_id}: rf set but history does not end at dest")


def serialize_bottle(b: Bottle) -> bytes:
    """Big-endian wire image; 11 header bytes plus 2 per history entry."""
    if len(b.history) > 0xFFFF:
        raise WireOverflow(f"history length {len(b.history)} exceeds 65535")
    flags = (_FLAG_RF if b.rf else 0) | (_FLAG_FAILURE if b.failure else 0)
    head = _HEADER.pack(b.src, b.dest, b.btl_id.origin, b.btl_id.seq,
                        flags, len(b.history))
    return head + struct.pack(f">{len(b.history)}H", *b.history)


def deserialize_bottle(data: bytes) -> Bottle:
    if len(data) < HEADER_BYTES:
        raise MalformedBottle(f"short packet: {len(data)} bytes")
    src, dest, origin, seq, flags, n = _HEADER.unpack_from(data)
    expected = HEADER_BYTES + 2 * n
    if len(data) != expected:
        raise MalformedBottle(f"length mismatch: got {len(data)}, header says {expected}")
    history = list(struct.unpack_from(f">{n}H", data, HEADER_BYTES))
    return Bottle(src=src, dest=dest, btl_id=BottleId(origin, seq),
                  rf=bool(flags & _FLAG_RF), history=history,
                  failure=bool(flags & _FLAG_FAILURE))


def serialized_size(history_len: int) -> int:
    return HEADER_BYTES + 2 * history_len
