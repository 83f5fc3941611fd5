"""Run configuration: protocol knobs and scenario files.

Scenarios are JSON documents naming a topology (inline file path or a
generator spec), a seed, protocol parameter overrides, the request
schedule, fault injections, and the simulation horizon.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError

DEFAULT_RETRY_LIMIT = 3
DEFAULT_PER_HOP_LATENCY = 1
DEFAULT_QUEUE_CAP = 16
DEFAULT_HORIZON = 10_000


@dataclass(frozen=True)
class ProtocolConfig:
    """Per-node protocol parameters.

    Defaults scale with network size: a bottle may walk up to 4x the node
    count, and the request timer covers a full out-and-back walk.
    """

    hop_limit: int
    timeout: int
    retry_limit: int = DEFAULT_RETRY_LIMIT
    queue_cap: int = DEFAULT_QUEUE_CAP
    per_hop_latency: int = DEFAULT_PER_HOP_LATENCY
    beacon_period: int = DEFAULT_PER_HOP_LATENCY

    def __post_init__(self) -> None:
        for name, minimum in (("hop_limit", 1), ("timeout", 1), ("retry_limit", 0),
                              ("queue_cap", 1), ("per_hop_latency", 1),
                              ("beacon_period", 1)):
            if getattr(self, name) < minimum:
                raise ConfigError(f"protocol.{name} must be >= {minimum}")

    @classmethod
    def defaults_for(cls, n_nodes: int, **overrides: int) -> "ProtocolConfig":
        latency = overrides.get("per_hop_latency", DEFAULT_PER_HOP_LATENCY)
        hop_limit = overrides.get("hop_limit", 4 * n_nodes)
        params = {
            "hop_limit": hop_limit,
            "timeout": 2 * hop_limit * latency,
            "retry_limit": DEFAULT_RETRY_LIMIT,
            "queue_cap": DEFAULT_QUEUE_CAP,
            "per_hop_latency": latency,
            "beacon_period": latency,
        }
        params.update(overrides)
        return cls(**params)


@dataclass(frozen=True)
class RequestSpec:
    at: int
    src: int
    dest: int
    payload_len: int = 0


@dataclass(frozen=True)
class RandomRequests:
    count: int
    first_at: int = 1
    spacing: int | None = None  # default: long enough for full resolution


@dataclass(frozen=True)
class FaultSpec:
    at: int
    op: str              # fail_node | restore_node | fail_link | restore_link
    node: int | None = None
    link: tuple[int, int] | None = None


@dataclass
class ScenarioConfig:
    seed: int
    topology_file: str | None = None
    generator: dict[str, Any] | None = None
    protocol: dict[str, int] = field(default_factory=dict)
    requests: list[RequestSpec] = field(default_factory=list)
    random_requests: RandomRequests | None = None
    faults: list[FaultSpec] = field(default_factory=list)
    horizon: int | None = None  # None: sized to cover all scheduled requests

    def protocol_for(self, n_nodes: int) -> ProtocolConfig:
        return ProtocolConfig.defaults_for(n_nodes, **self.protocol)


_FAULT_OPS = {"fail_node", "restore_node", "fail_link", "restore_link"}


def _require(doc: dict, key: str, source: str) -> Any:
    if key not in doc:
        raise ConfigError(f"{source}: missing field '{key}'")
    return doc[key]


def _int_field(doc: dict, key: str, source: str, minimum: int = 0) -> int:
    value = _require(doc, key, source)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{source}: field '{key}': expected integer >= {minimum}, got {value!r}")
    return value


def scenario_from_dict(doc: dict, source: str = "<scenario>") -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: expected a JSON object")
    seed = _int_field(doc, "seed", source)

    topo = _require(doc, "topology", source)
    topology_file = None
    generator = None
    if isinstance(topo, dict) and "file" in topo:
        topology_file = topo["file"]
    elif isinstance(topo, dict) and "generator" in topo:
        gen = topo["generator"]
        for key in ("kind", "nodes", "seed"):
            if key not in gen:
                raise ConfigError(f"{source}: field 'topology.generator.{key}' is required")
        generator = gen
    else:
        raise ConfigError(f"{source}: field 'topology': need 'file' or 'generator'")

    protocol = doc.get("protocol", {})
    if not isinstance(protocol, dict):
        raise ConfigError(f"{source}: field 'protocol': expected an object")
    for key, value in protocol.items():
        if key not in ProtocolConfig.__dataclass_fields__:
            raise ConfigError(f"{source}: field 'protocol.{key}': unknown parameter")
        if not isinstance(value, int) or value < 0:
            raise ConfigError(f"{source}: field 'protocol.{key}': expected non-negative integer")

    requests = []
    for i, req in enumerate(doc.get("requests", [])):
        where = f"{source}: field 'requests[{i}]'"
        if not isinstance(req, dict):
            raise ConfigError(f"{where}: expected an object")
        requests.append(RequestSpec(
            at=_int_field(req, "at", where),
            src=_int_field(req, "src", where),
            dest=_int_field(req, "dest", where),
            payload_len=req.get("payload_len", 0),
        ))

    random_requests = None
    if "random_requests" in doc:
        rr = doc["random_requests"]
        where = f"{source}: field 'random_requests'"
        if not isinstance(rr, dict):
            raise ConfigError(f"{where}: expected an object")
        random_requests = RandomRequests(
            count=_int_field(rr, "count", where, minimum=1),
            first_at=rr.get("first_at", 1),
            spacing=rr.get("spacing"),
        )

    faults = []
    for i, fault in enumerate(doc.get("faults", [])):
        where = f"{source}: field 'faults[{i}]'"
        if not isinstance(fault, dict):
            raise ConfigError(f"{where}: expected an object")
        op = _require(fault, "op", where)
        if op not in _FAULT_OPS:
            raise ConfigError(f"{where}: field 'op': unknown operation {op!r}")
        at = _int_field(fault, "at", where)
        if op.endswith("_node"):
            faults.append(FaultSpec(at=at, op=op, node=_int_field(fault, "node", where)))
        else:
            link = _require(fault, "link", where)
            if (not isinstance(link, (list, tuple)) or len(link) != 2
                    or not all(isinstance(x, int) for x in link)):
                raise ConfigError(f"{where}: field 'link': expected [a, b]")
            faults.append(FaultSpec(at=at, op=op, link=(link[0], link[1])))

    horizon = doc.get("horizon")
    if horizon is not None and (not isinstance(horizon, int) or horizon <= 0):
        raise ConfigError(f"{source}: field 'horizon': expected positive integer")

    return ScenarioConfig(
        seed=seed,
        topology_file=topology_file,
        generator=generator,
        protocol=dict(protocol),
        requests=requests,
        random_requests=random_requests,
        faults=faults,
        horizon=horizon,
    )


def load_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    scenario = scenario_from_dict(doc, source=path)
    if scenario.topology_file is not None and not os.path.isabs(scenario.topology_file):
        scenario.topology_file = os.path.join(os.path.dirname(os.path.abspath(path)),
                                              scenario.topology_file)
    return scenario
