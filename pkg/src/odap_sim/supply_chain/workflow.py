"""The manufacturing workflow on the event engine.

Each stage firing holds its machine for the whole run: a read phase over the
carrier token's fragments, the operation itself, then a write phase. Fragments
resident on the product cost a product access (no shared resource); the others
go to the databases and queue on their resources.
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
import logging
from typing import Callable, Deque, Dict, Iterable, List, Optional, Tuple, TypeVar

import numpy as np

from ..engine import DEFAULT_EVENT_LIMIT, Engine, Resource, RunStatistics, TraceRecord
from ..errors import ConfigurationError, WorkflowError
from ..network.rtt import Propagation, RttModel, product_access_time
from ..scenario.models import FragmentCatalog, QueryProfile, Scenario, Stage
from ..scenario.patterns import DistributionPattern
from .tokens import DbState, ProductToken, commit_write


logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class Access:
    fragment_id: str
    query_bytes: int
    on_product: bool


@dataclass(frozen=True)
class AccessLists:
    reads: Tuple[Access, ...] = ()
    writes: Tuple[Access, ...] = ()

    @property
    def db_reads(self) -> Dict[str, int]:
        return {a.fragment_id: a.query_bytes for a in self.reads if not a.on_product}

    @property
    def product_reads(self) -> Dict[str, int]:
        return {a.fragment_id: a.query_bytes for a in self.reads if a.on_product}

    @property
    def db_writes(self) -> Dict[str, int]:
        return {a.fragment_id: a.query_bytes for a in self.writes if not a.on_product}

    @property
    def product_writes(self) -> Dict[str, int]:
        return {a.fragment_id: a.query_bytes for a in self.writes if a.on_product}


def split_access_lists(
    profile: QueryProfile, pattern: DistributionPattern, catalog: FragmentCatalog
) -> AccessLists:
    """Partition a machine's reads and writes by where the pattern puts each fragment.

    Both sequences follow catalog order.
    """
    if pattern.k != catalog.k:
        raise ConfigurationError(
            f"pattern has {pattern.k} fragments, catalog has {catalog.k}"
        )
    reads, writes = [], []
    for index, fragment_id in enumerate(catalog.ids):
        on_product = pattern.bits[index]
        if fragment_id in profile.reads:
            reads.append(Access(fragment_id, profile.reads[fragment_id], on_product))
        if fragment_id in profile.updates:
            writes.append(Access(fragment_id, profile.updates[fragment_id], on_product))
    return AccessLists(tuple(reads), tuple(writes))


@dataclass
class StageStats:
    stage: str
    machine: str
    firings: int = 0
    completed: int = 0
    outputs: int = 0
    busy_s: float = 0.0


@dataclass
class SimulationResult:
    makespan_s: float
    seed: int
    pattern_id: int
    throughput_bps: float
    produced: Dict[str, int] = field(default_factory=dict)
    stage_stats: Dict[str, StageStats] = field(default_factory=dict)
    statistics: Optional[RunStatistics] = None
    trace: List[TraceRecord] = field(default_factory=list)
    consistency_violations: List[Tuple[float, str]] = field(default_factory=list)
    db_versions: Dict[Tuple[str, str], int] = field(default_factory=dict)


def _run_in_sequence(
    items: Iterable[T], handler: Callable[[T, Callable[[], None]], None], then: Callable[[], None]
) -> None:
    """Run ``handler(item, advance)`` for each item, one after another."""
    pending = iter(items)

    def advance() -> None:
        item = next(pending, None)
        if item is None:
            then()
        else:
            handler(item, advance)

    advance()


class StageRun:
    def __init__(
        self,
        sim: "SupplyChainSimulation",
        stage: Stage,
        tokens: List[ProductToken],
        firing_id: str,
    ):
        self.sim = sim
        self.stage = stage
        self.tokens = tokens
        self.firing_id = firing_id
        self.machine_id = stage.machine
        self.profile = sim.profiles[stage.machine]
        self.access = sim.access[stage.name]
        self.oper_time_s = sim.scenario.machine(stage.machine).oper_time_s
        carrier_class = sim.scenario.workflow.carrier_of(stage)
        self.carrier = tokens[stage.inputs.index(carrier_class)]
        self.outputs: List[ProductToken] = []
        self.started_at = 0.0

    @property
    def engine(self) -> Engine:
        return self.sim.engine

    def start(self) -> None:
        self.started_at = self.engine.now
        self.sim.stage_stats[self.stage.name].firings += 1
        if len(self.tokens) > 1:
            self.engine.record("join", self.firing_id, self.machine_id)
        _run_in_sequence(self.access.reads, self._read, self._operate)

    def _read(self, access: Access, done: Callable[[], None]) -> None:
        if access.on_product:
            self.engine.record("read_product", self.firing_id, self.carrier.instance_id)
            self.engine.schedule_in(
                self.sim.product_time(access),
                done,
                kind="read_product",
                entity_id=self.firing_id,
            )
            return
        timing = self.sim.rtt.read_timing(self.machine_id, access.fragment_id, self.sim.rng)
        self.engine.record("read_db", self.firing_id, timing.db_id)
        self.sim.dbs[timing.db_id].acquire(
            self.firing_id, timing.duration_s, on_done=done
        )

    def _operate(self) -> None:
        self.engine.record("operate", self.firing_id, self.machine_id)
        self.engine.schedule_in(
            self.oper_time_s,
            self._write_phase,
            kind="operate",
            entity_id=self.firing_id,
            resource_id=self.machine_id,
        )

    def _write_phase(self) -> None:
        if self.sim.scenario.workflow.write_granularity == "per_piece":
            self.outputs = self._derive_outputs()
            targets = self.outputs
        else:
            targets = [self.carrier]
        steps = [(token, access) for token in targets for access in self.access.writes]
        _run_in_sequence(steps, self._write, self._finish)

    def _write(
        self, step: Tuple[ProductToken, Access], done: Callable[[], None]
    ) -> None:
        token, access = step
        if access.on_product:
            self.engine.record("write_product", self.firing_id, token.instance_id)

            def committed() -> None:
                commit_write(token, access.fragment_id, self.profile)
                done()

            self.engine.schedule_in(
                self.sim.product_time(access),
                committed,
                kind="write_product",
                entity_id=self.firing_id,
            )
            return

        timing = self.sim.rtt.write_timing(
            self.machine_id, access.fragment_id, self.sim.rng
        )
        locked = timing.locked_dbs
        self.engine.record("write_db", self.firing_id, timing.primary_db)

        def finish() -> None:
            version = commit_write(
                self.sim.db_state, access.fragment_id, self.profile, locked
            )
            for db_id in locked:
                self.sim.dbs[db_id].release(self.firing_id)
            for propagation in timing.propagations:
                self.sim.propagate(
                    self.firing_id, access.fragment_id, version, propagation
                )
            self.sim.check_consistency()
            done()

        def lock(index: int) -> None:
            if index == len(locked):
                self.engine.schedule_in(
                    timing.duration_s,
                    finish,
                    kind="write_db",
                    entity_id=self.firing_id,
                    resource_id=timing.primary_db,
                )
                return
            self.sim.dbs[locked[index]].acquire(
                self.firing_id, on_granted=lambda: lock(index + 1)
            )

        lock(0)

    def _derive_outputs(self) -> List[ProductToken]:
        return [
            self.carrier.derive(self.stage.output_class, self.sim.next_id(self.stage.output_class))
            for _ in range(self.stage.output_multiplicity)
        ]

    def _finish(self) -> None:
        if not self.outputs:
            self.outputs = self._derive_outputs()
        self.sim.machines[self.machine_id].release(self.firing_id)
        stats = self.sim.stage_stats[self.stage.name]
        stats.completed += 1
        stats.outputs += len(self.outputs)
        stats.busy_s += self.engine.now - self.started_at
        self.sim.emit(self.stage.output_class, self.outputs)


class SupplyChainSimulation:
    def __init__(
        self,
        scenario: Scenario,
        pattern: DistributionPattern,
        throughput_bps: Optional[float] = None,
        seed: int = 0,
        record_trace: bool = False,
        event_limit: int = DEFAULT_EVENT_LIMIT,
        rtt_model: Optional[RttModel] = None,
    ):
        self.scenario = scenario
        self.workflow = scenario.workflow
        self.pattern = pattern
        self.catalog = scenario.catalog
        self.throughput_bps = (
            throughput_bps if throughput_bps is not None else scenario.product.throughput_bps
        )
        if self.throughput_bps <= 0:
            raise ConfigurationError(
                f"product throughput must be positive, got {self.throughput_bps}"
            )
        if not 0 <= seed < 2**64:
            raise ConfigurationError(f"seed must be in [0, 2^64), got {seed}")
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.rtt = rtt_model or RttModel.from_scenario(scenario)
        self.engine = Engine(event_limit=event_limit, record_trace=record_trace)
        self.machines = {m.id: Resource(self.engine, m.id) for m in scenario.machines}
        self.dbs = {db.id: Resource(self.engine, db.id) for db in scenario.databases}
        self.db_state = DbState(self.catalog)
        self.profiles = {m.id: m.profile for m in scenario.machines}
        self.access = {
            stage.name: split_access_lists(
                self.profiles[stage.machine], pattern, self.catalog
            )
            for stage in self.workflow.stages
        }
        self.carried = pattern.product_fragments(self.catalog)
        self.pools: Dict[str, Deque[ProductToken]] = defaultdict(deque)
        self.produced: Dict[str, int] = defaultdict(int)
        self.stage_stats = {
            stage.name: StageStats(stage.name, stage.machine) for stage in self.workflow.stages
        }
        self.violations: List[Tuple[float, str]] = []
        self.completed = 0
        self.makespan_s: Optional[float] = None
        self._ids: Dict[str, int] = defaultdict(int)
        self._firings = 0

    def next_id(self, token_class: str) -> str:
        self._ids[token_class] += 1
        return f"{token_class}-{self._ids[token_class]}"

    def product_time(self, access: Access) -> float:
        if self.scenario.product.transfer_mode == "whole_fragment":
            size = self.catalog.get(access.fragment_id).payload_bytes
        else:
            size = access.query_bytes
        return product_access_time(
            size, self.throughput_bps, self.scenario.product.access_overhead_s
        )

    def propagate(
        self, writer: str, fragment_id: str, version: int, propagation: Propagation
    ) -> None:
        """Background copy of a committed version to one replica."""
        self.db_state.start_propagation(fragment_id)
        self.engine.record("propagate", writer, propagation.db_id)

        def applied() -> None:
            self.db_state.apply(propagation.db_id, fragment_id, version)
            self.db_state.finish_propagation(fragment_id)
            self.check_consistency()

        self.dbs[propagation.db_id].acquire(
            f"{writer}:{fragment_id}->{propagation.db_id}",
            propagation.duration_s,
            on_done=applied,
        )

    def check_consistency(self) -> None:
        for fragment_id in self.db_state.inconsistent_fragments():
            logger.warning(
                f"⚠️ Replicas of {fragment_id} disagree at t={self.engine.now:.6f}"
            )
            self.violations.append((self.engine.now, fragment_id))

    def emit(self, token_class: str, tokens: List[ProductToken]) -> None:
        self.produced[token_class] += len(tokens)
        if token_class == self.workflow.target_class:
            self.completed += len(tokens)
            if self.makespan_s is None and self.completed >= self.workflow.target_count:
                self.makespan_s = self.engine.now
            return
        self.pools[token_class].extend(tokens)
        consumer = self.workflow.consumer_of(token_class)
        if consumer is not None:
            self.dispatch(consumer)

    def dispatch(self, stage: Stage) -> None:
        while all(self.pools[cls] for cls in stage.inputs):
            tokens = [self.pools[cls].popleft() for cls in stage.inputs]
            self._firings += 1
            firing_id = f"{stage.name}#{self._firings}"
            run = StageRun(self, stage, tokens, firing_id)
            self.machines[stage.machine].acquire(firing_id, on_granted=run.start)

    def run(self) -> SimulationResult:
        target = self.workflow.target_count
        if target == 0:
            self.makespan_s = 0.0
            return self._result(self.engine.statistics())

        for item in self.workflow.inputs:
            for _ in range(item.count):
                token = ProductToken.fresh(
                    item.product_class, self.next_id(item.product_class), self.carried
                )
                self.pools[item.product_class].append(token)
        for stage in self.workflow.stages:
            self.dispatch(stage)

        statistics = self.engine.run_until(lambda: self.completed >= target)
        if self.makespan_s is None:
            raise WorkflowError(
                f"workflow stalled after {self.completed} of {target} "
                f"{self.workflow.target_class} tokens at t={self.engine.now:g}"
            )
        return self._result(statistics)

    def _result(self, statistics: RunStatistics) -> SimulationResult:
        return SimulationResult(
            makespan_s=self.makespan_s,
            seed=self.seed,
            pattern_id=self.pattern.pattern_id,
            throughput_bps=self.throughput_bps,
            produced=dict(self.produced),
            stage_stats=self.stage_stats,
            statistics=statistics,
            trace=list(self.engine.trace),
            consistency_violations=list(self.violations),
            db_versions=dict(self.db_state.versions),
        )


def run_simulation(
    scenario: Scenario,
    pattern: DistributionPattern,
    throughput_bps: Optional[float] = None,
    seed: int = 0,
    record_trace: bool = False,
    event_limit: int = DEFAULT_EVENT_LIMIT,
    rtt_model: Optional[RttModel] = None,
) -> SimulationResult:
    simulation = SupplyChainSimulation(
        scenario,
        pattern,
        throughput_bps=throughput_bps,
        seed=seed,
        record_trace=record_trace,
        event_limit=event_limit,
        rtt_model=rtt_model,
    )
    result = simulation.run()
    logger.debug(
        f"Simulated pattern {pattern.bit_string} at {simulation.throughput_bps:g} bps "
        f"seed={seed}: makespan {result.makespan_s:.3f}s "
        f"({result.statistics.events_processed} events)"
    )
    return result
