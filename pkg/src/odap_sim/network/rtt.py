"""Analytic round-trip-time model for database queries and product accesses.

A query from a node to a database crossing ``h`` hops costs::

    2*h*per_hop_latency + h*(bytes + 2*overhead)*8/link_rate
        + server_processing + op_overhead[op]

Reads go to the nearest hosting replica. Synchronous primary-copy writes add
the primary-to-farthest-replica round trip before acknowledging.
"""

from dataclasses import dataclass, replace
from typing import Dict, Literal, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..scenario.models import FragmentCatalog, QueryProfile, Scenario, Topology


Op = Literal["read", "write"]


@dataclass(frozen=True)
class RttParameters:
    link_rate_bps: float
    per_hop_latency_s: float
    server_processing_s: float
    request_overhead_bytes: int = 0
    read_overhead_s: float = 0.0
    write_overhead_s: float = 0.0

    @classmethod
    def from_topology(cls, topology: Topology) -> "RttParameters":
        return cls(
            link_rate_bps=topology.link_rate_bps,
            per_hop_latency_s=topology.per_hop_latency_s,
            server_processing_s=topology.server_processing_s,
            request_overhead_bytes=topology.request_overhead_bytes,
            read_overhead_s=topology.op_overhead_s.read,
            write_overhead_s=topology.op_overhead_s.write,
        )

    def topology_update(self) -> Dict[str, object]:
        return {
            "link_rate_bps": self.link_rate_bps,
            "per_hop_latency_s": self.per_hop_latency_s,
            "server_processing_s": self.server_processing_s,
            "request_overhead_bytes": self.request_overhead_bytes,
            "op_overhead_s": {
                "read": self.read_overhead_s,
                "write": self.write_overhead_s,
            },
        }


@dataclass(frozen=True)
class RttSample:
    mean_s: float
    variance: float
    draws: int


@dataclass(frozen=True)
class ReadTiming:
    db_id: str
    duration_s: float


@dataclass(frozen=True)
class Propagation:
    db_id: str
    duration_s: float


@dataclass(frozen=True)
class WriteTiming:
    primary_db: str
    replica_dbs: Tuple[str, ...]
    duration_s: float
    propagations: Tuple[Propagation, ...] = ()

    @property
    def locked_dbs(self) -> Tuple[str, ...]:
        """Databases held for the whole write duration."""
        if self.propagations:
            return (self.primary_db,)
        return tuple(sorted((self.primary_db, *self.replica_dbs)))


def product_access_time(
    payload_bytes: float, throughput_bps: float, overhead_s: float = 0.0
) -> float:
    if throughput_bps <= 0:
        raise ConfigurationError(
            f"product throughput must be positive, got {throughput_bps}"
        )
    if payload_bytes < 0:
        raise ConfigurationError(f"byte count must be non-negative, got {payload_bytes}")
    return payload_bytes * 8 / throughput_bps + overhead_s


class RttModel:
    def __init__(
        self,
        topology: Topology,
        catalog: FragmentCatalog,
        profiles: Dict[str, QueryProfile],
        mode: Literal["pc-s", "pc-as"] = "pc-s",
        params: Optional[RttParameters] = None,
    ):
        self.topology = topology
        self.catalog = catalog
        self.profiles = profiles
        self.mode = mode
        self.params = params or RttParameters.from_topology(topology)
        self._fragments = {f.id: f for f in catalog.fragments}
        self._read_cache: Dict[Tuple[str, str], ReadTiming] = {}
        self._write_cache: Dict[Tuple[str, str], WriteTiming] = {}

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "RttModel":
        return cls(
            topology=scenario.topology,
            catalog=scenario.catalog,
            profiles={m.id: m.profile for m in scenario.machines},
            mode=scenario.replication.mode,
        )

    def with_parameters(self, params: RttParameters) -> "RttModel":
        return RttModel(self.topology, self.catalog, self.profiles, self.mode, params)

    def with_mode(self, mode: Literal["pc-s", "pc-as"]) -> "RttModel":
        return RttModel(self.topology, self.catalog, self.profiles, mode, self.params)

    def with_overrides(self, **changes: float) -> "RttModel":
        return self.with_parameters(replace(self.params, **changes))

    def path_rtt(self, source: str, db_id: str, payload_bytes: int, op: Op) -> float:
        p = self.params
        try:
            hops = self.topology.hops(source, db_id)
        except KeyError as e:
            raise ConfigurationError(f"node {e.args[0]} is not in the topology") from e
        wire_bytes = payload_bytes + 2 * p.request_overhead_bytes
        op_overhead = p.read_overhead_s if op == "read" else p.write_overhead_s
        return (
            2 * hops * p.per_hop_latency_s
            + hops * wire_bytes * 8 / p.link_rate_bps
            + p.server_processing_s
            + op_overhead
        )

    def _hosts(self, fragment_id: str) -> Tuple[str, ...]:
        fragment = self._fragments.get(fragment_id)
        if fragment is None:
            raise ConfigurationError(f"unknown fragment {fragment_id}")
        if not fragment.hosts:
            raise ConfigurationError(
                f"fragment {fragment_id} is not allocated to any database"
            )
        return fragment.hosts

    def _bytes(self, machine_id: str, fragment_id: str, op: Op) -> int:
        profile = self.profiles.get(machine_id)
        if profile is None:
            raise ConfigurationError(f"unknown machine {machine_id}")
        table = profile.reads if op == "read" else profile.updates
        if fragment_id not in table:
            verb = "read" if op == "read" else "update"
            raise ConfigurationError(
                f"machine {machine_id} has no {verb} profile for {fragment_id}"
            )
        return table[fragment_id]

    def single_db_read_base(self, machine_id: str, db_id: str, fragment_id: str) -> float:
        if db_id not in self._hosts(fragment_id):
            raise ConfigurationError(f"{db_id} does not host {fragment_id}")
        payload = self._bytes(machine_id, fragment_id, "read")
        return self.path_rtt(machine_id, db_id, payload, "read")

    def read_base(self, machine_id: str, fragment_id: str) -> ReadTiming:
        cached = self._read_cache.get((machine_id, fragment_id))
        if cached is not None:
            return cached
        best: Optional[ReadTiming] = None
        for db_id in self._hosts(fragment_id):
            rtt = self.single_db_read_base(machine_id, db_id, fragment_id)
            if best is None or rtt < best.duration_s:
                best = ReadTiming(db_id, rtt)
        self._read_cache[(machine_id, fragment_id)] = best
        return best

    def write_base(self, machine_id: str, fragment_id: str) -> WriteTiming:
        cached = self._write_cache.get((machine_id, fragment_id))
        if cached is None:
            cached = self._compute_write_base(machine_id, fragment_id)
            self._write_cache[(machine_id, fragment_id)] = cached
        return cached

    def _compute_write_base(self, machine_id: str, fragment_id: str) -> WriteTiming:
        hosts = self._hosts(fragment_id)
        primary, replicas = hosts[0], hosts[1:]
        payload = self._bytes(machine_id, fragment_id, "write")
        to_primary = self.path_rtt(machine_id, primary, payload, "write")
        fan_out = [
            Propagation(db_id, self.path_rtt(primary, db_id, payload, "write"))
            for db_id in replicas
        ]
        if self.mode == "pc-as":
            return WriteTiming(primary, replicas, to_primary, tuple(fan_out))
        slowest = max((p.duration_s for p in fan_out), default=0.0)
        return WriteTiming(primary, replicas, to_primary + slowest)

    def _jitter(
        self,
        base: float,
        machine_id: str,
        db_id: str,
        rng: Optional[np.random.Generator],
    ) -> float:
        sigma = self.topology.jitter_sigma(machine_id, db_id)
        if rng is None or sigma == 0:
            return base
        return max(base + rng.normal(0.0, sigma), 0.5 * base)

    def read_timing(
        self, machine_id: str, fragment_id: str, rng: Optional[np.random.Generator] = None
    ) -> ReadTiming:
        base = self.read_base(machine_id, fragment_id)
        return ReadTiming(
            base.db_id, self._jitter(base.duration_s, machine_id, base.db_id, rng)
        )

    def write_timing(
        self, machine_id: str, fragment_id: str, rng: Optional[np.random.Generator] = None
    ) -> WriteTiming:
        base = self.write_base(machine_id, fragment_id)
        return replace(
            base,
            duration_s=self._jitter(base.duration_s, machine_id, base.primary_db, rng),
        )

    def db_read_rtt(
        self, machine_id: str, fragment_id: str, rng: Optional[np.random.Generator] = None
    ) -> float:
        return self.read_timing(machine_id, fragment_id, rng).duration_s

    def db_write_rtt(
        self, machine_id: str, fragment_id: str, rng: Optional[np.random.Generator] = None
    ) -> float:
        return self.write_timing(machine_id, fragment_id, rng).duration_s

    def target_base(self, machine_id: str, db_id: str, fragment_id: str, op: Op) -> float:
        """Deterministic RTT of one (machine, db, fragment, op) cell."""
        if op == "read":
            return self.single_db_read_base(machine_id, db_id, fragment_id)
        timing = self.write_base(machine_id, fragment_id)
        if db_id != timing.primary_db:
            raise ConfigurationError(
                f"writes of {fragment_id} go to primary {timing.primary_db}, not {db_id}"
            )
        return timing.duration_s

    def sample(
        self,
        machine_id: str,
        fragment_id: str,
        op: Op,
        rng: np.random.Generator,
        draws: int = 50,
    ) -> RttSample:
        draw = self.db_read_rtt if op == "read" else self.db_write_rtt
        values = np.array([draw(machine_id, fragment_id, rng) for _ in range(draws)])
        variance = float(values.var(ddof=1)) if draws > 1 else 0.0
        return RttSample(mean_s=float(values.mean()), variance=variance, draws=draws)
