"""Static case-study data: fragments, allocation, query profiles, topology, workflow.

Every model is frozen and rejects unknown keys, so a loaded scenario can be
shared read-only between concurrently running simulations.
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FragmentSpec(_Frozen):
    id: str
    payload_bytes: PositiveInt
    primary_db: Optional[str] = None


class DatabaseSpec(_Frozen):
    id: str
    fragments: List[str] = Field(default_factory=list)


class Machine(_Frozen):
    id: str
    oper_time_s: NonNegativeFloat
    reads: Dict[str, PositiveInt] = Field(default_factory=dict)
    updates: Dict[str, PositiveInt] = Field(default_factory=dict)

    @property
    def profile(self) -> "QueryProfile":
        return QueryProfile(machine_id=self.id, reads=self.reads, updates=self.updates)


class QueryProfile(_Frozen):
    machine_id: str
    reads: Dict[str, PositiveInt] = Field(default_factory=dict)
    updates: Dict[str, PositiveInt] = Field(default_factory=dict)


class Cluster(_Frozen):
    id: str
    machines: List[str] = Field(default_factory=list)
    databases: List[str] = Field(default_factory=list)


class OpOverhead(_Frozen):
    read: NonNegativeFloat = 0.0
    write: NonNegativeFloat = 0.0


class JitterOverride(_Frozen):
    machine: str
    db: str
    sigma_s: NonNegativeFloat


class Topology(_Frozen):
    link_rate_bps: PositiveFloat
    per_hop_latency_s: NonNegativeFloat
    server_processing_s: NonNegativeFloat
    request_overhead_bytes: NonNegativeInt = 0
    op_overhead_s: OpOverhead = Field(default_factory=OpOverhead)
    jitter_sigma_s: NonNegativeFloat = 0.0
    jitter_overrides: List[JitterOverride] = Field(default_factory=list)
    clusters: List[Cluster]

    def cluster_index(self, node_id: str) -> int:
        for index, cluster in enumerate(self.clusters):
            if node_id in cluster.machines or node_id in cluster.databases:
                return index
        raise KeyError(node_id)

    def hops(self, source: str, target: str) -> int:
        """Access hop plus one hop per backbone link between the two clusters."""
        return 1 + abs(self.cluster_index(source) - self.cluster_index(target))

    def jitter_sigma(self, machine_id: str, db_id: str) -> float:
        for override in self.jitter_overrides:
            if override.machine == machine_id and override.db == db_id:
                return override.sigma_s
        return self.jitter_sigma_s


class WorkflowInput(_Frozen):
    product_class: str
    count: NonNegativeInt


class Stage(_Frozen):
    name: str
    machine: str
    inputs: List[str] = Field(min_length=1)
    output_class: str
    output_multiplicity: PositiveInt = 1


class JoinSpec(_Frozen):
    stage: str
    carrier: str


class WorkflowDefinition(_Frozen):
    inputs: List[WorkflowInput]
    stages: List[Stage] = Field(min_length=1)
    join: Optional[JoinSpec] = None
    target_count: NonNegativeInt
    write_granularity: Literal["per_lot", "per_piece"] = "per_lot"

    @property
    def target_class(self) -> str:
        return self.stages[-1].output_class

    def carrier_of(self, stage: Stage) -> str:
        if self.join is not None and self.join.stage == stage.name:
            return self.join.carrier
        return stage.inputs[0]

    def consumer_of(self, product_class: str) -> Optional[Stage]:
        for stage in self.stages:
            if product_class in stage.inputs:
                return stage
        return None

    def producible_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for item in self.inputs:
            counts[item.product_class] = counts.get(item.product_class, 0) + item.count
        for stage in self.stages:
            firings = min(counts.get(cls, 0) for cls in stage.inputs)
            counts[stage.output_class] = (
                counts.get(stage.output_class, 0)
                + firings * stage.output_multiplicity
            )
        return counts


class ProductSettings(_Frozen):
    throughput_bps: PositiveFloat = 1_000_000.0
    access_overhead_s: NonNegativeFloat = 0.0
    transfer_mode: Literal["query_bytes", "whole_fragment"] = "query_bytes"


class ReplicationSettings(_Frozen):
    mode: Literal["pc-s", "pc-as"] = "pc-s"


class Fragment(_Frozen):
    id: str
    payload_bytes: PositiveInt
    primary_db: Optional[str]
    replica_dbs: Tuple[str, ...] = ()

    @property
    def hosts(self) -> Tuple[str, ...]:
        if self.primary_db is None:
            return ()
        return (self.primary_db, *self.replica_dbs)


class FragmentCatalog(_Frozen):
    fragments: Tuple[Fragment, ...] = ()

    @property
    def k(self) -> int:
        return len(self.fragments)

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(f.id for f in self.fragments)

    def index(self, fragment_id: str) -> int:
        return self.ids.index(fragment_id)

    def get(self, fragment_id: str) -> Fragment:
        for fragment in self.fragments:
            if fragment.id == fragment_id:
                return fragment
        raise KeyError(fragment_id)


def _db_sort_key(db_id: str) -> Tuple[int, str]:
    digits = "".join(ch for ch in db_id if ch.isdigit())
    return (int(digits) if digits else 0, db_id)


class Scenario(_Frozen):
    name: str = "scenario"
    fragments: List[FragmentSpec] = Field(default_factory=list)
    databases: List[DatabaseSpec] = Field(default_factory=list)
    machines: List[Machine] = Field(default_factory=list)
    topology: Topology
    workflow: WorkflowDefinition
    product: ProductSettings = Field(default_factory=ProductSettings)
    replication: ReplicationSettings = Field(default_factory=ReplicationSettings)

    @property
    def catalog(self) -> FragmentCatalog:
        return _build_catalog(self.fragments, self.databases)

    def machine(self, machine_id: str) -> Machine:
        for machine in self.machines:
            if machine.id == machine_id:
                return machine
        raise KeyError(machine_id)

    def profile(self, machine_id: str) -> QueryProfile:
        return self.machine(machine_id).profile

    @property
    def database_ids(self) -> Tuple[str, ...]:
        return tuple(db.id for db in self.databases)

    @model_validator(mode="after")
    def _check_invariants(self) -> "Scenario":
        fragment_ids = [f.id for f in self.fragments]
        _require_unique("fragment id", fragment_ids)
        db_ids = [db.id for db in self.databases]
        _require_unique("database id", db_ids)
        machine_ids = [m.id for m in self.machines]
        _require_unique("machine id", machine_ids)

        hosts: Dict[str, List[str]] = {fid: [] for fid in fragment_ids}
        for db in self.databases:
            _require_unique(f"fragment in {db.id}", db.fragments)
            for fid in db.fragments:
                if fid not in hosts:
                    raise ValueError(f"database {db.id} hosts unknown fragment {fid}")
                hosts[fid].append(db.id)

        for machine in self.machines:
            for section, mapping in (("reads", machine.reads), ("updates", machine.updates)):
                for fid in mapping:
                    if fid not in hosts:
                        raise ValueError(
                            f"machine {machine.id} {section} unknown fragment {fid}"
                        )

        self._check_topology(db_ids, machine_ids)
        self._check_workflow(machine_ids)

        _build_catalog(self.fragments, self.databases)
        return self

    def _check_topology(self, db_ids: List[str], machine_ids: List[str]) -> None:
        _require_unique("cluster id", [c.id for c in self.topology.clusters])
        placed_machines = [m for c in self.topology.clusters for m in c.machines]
        placed_dbs = [d for c in self.topology.clusters for d in c.databases]
        _require_unique("machine placement", placed_machines)
        _require_unique("database placement", placed_dbs)
        for db_id in db_ids:
            if db_id not in placed_dbs:
                raise ValueError(f"database {db_id} is not placed in any topology cluster")
        for db_id in placed_dbs:
            if db_id not in db_ids:
                raise ValueError(f"topology references unknown database {db_id}")
        for machine_id in machine_ids:
            if machine_id not in placed_machines:
                raise ValueError(
                    f"machine {machine_id} is not placed in any topology cluster"
                )
        for machine_id in placed_machines:
            if machine_id not in machine_ids:
                raise ValueError(f"topology references unknown machine {machine_id}")
        for override in self.topology.jitter_overrides:
            if override.machine not in machine_ids or override.db not in db_ids:
                raise ValueError(
                    f"jitter override ({override.machine}, {override.db}) "
                    "references an unknown machine or database"
                )

    def _check_workflow(self, machine_ids: List[str]) -> None:
        workflow = self.workflow
        _require_unique("stage name", [s.name for s in workflow.stages])
        available = {item.product_class for item in workflow.inputs}
        consumed: List[str] = []
        for stage in workflow.stages:
            if stage.machine not in machine_ids:
                raise ValueError(f"stage {stage.name} uses unknown machine {stage.machine}")
            for cls in stage.inputs:
                if cls not in available:
                    raise ValueError(
                        f"stage {stage.name} consumes {cls} before anything produces it"
                    )
            consumed.extend(stage.inputs)
            is_join = workflow.join is not None and workflow.join.stage == stage.name
            if len(stage.inputs) > 1 and not is_join:
                raise ValueError(
                    f"stage {stage.name} has several inputs but is not the join stage"
                )
            available.add(stage.output_class)
        _require_unique("consumed product class", consumed)

        if workflow.join is not None:
            join_stage = next(
                (s for s in workflow.stages if s.name == workflow.join.stage), None
            )
            if join_stage is None:
                raise ValueError(f"join stage {workflow.join.stage} is not defined")
            if workflow.join.carrier not in join_stage.inputs:
                raise ValueError(
                    f"join carrier {workflow.join.carrier} is not an input of "
                    f"{join_stage.name}"
                )

        producible = workflow.producible_counts().get(workflow.target_class, 0)
        if workflow.target_count > producible:
            raise ValueError(
                f"target count infeasible: target_count={workflow.target_count} exceeds "
                f"the {producible} producible {workflow.target_class} tokens"
            )


def _require_unique(label: str, values: List[str]) -> None:
    seen = set()
    for value in values:
        if value in seen:
            raise ValueError(f"duplicate {label}: {value}")
        seen.add(value)


def _build_catalog(
    specs: List[FragmentSpec], databases: List[DatabaseSpec]
) -> FragmentCatalog:
    fragments = []
    for spec in specs:
        hosting = sorted(
            (db.id for db in databases if spec.id in db.fragments), key=_db_sort_key
        )
        primary = spec.primary_db
        if primary is not None and primary not in hosting:
            raise ValueError(
                f"primary_db {primary} of {spec.id} does not host the fragment"
            )
        if primary is None and hosting:
            primary = hosting[0]
        fragments.append(
            Fragment(
                id=spec.id,
                payload_bytes=spec.payload_bytes,
                primary_db=primary,
                replica_dbs=tuple(db for db in hosting if db != primary),
            )
        )
    return FragmentCatalog(fragments=tuple(fragments))
