"""Runs every (pattern, throughput, replicate) simulation of a sweep plan.

Work is batched per (pattern, throughput) cell. With ``jobs > 1`` the batches
go to a process pool; each worker loads the scenario once in its initializer.
Records are sorted canonically before anything is emitted, so the output does
not depend on the degree of parallelism or on completion order.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import logging
from pathlib import Path
import time
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

from ..engine import DEFAULT_EVENT_LIMIT
from ..errors import ConfigurationError, SweepError
from ..network.rtt import RttModel
from ..scenario.loader import dump_scenario, load_scenario
from ..scenario.models import Scenario
from ..scenario.patterns import DistributionPattern
from ..supply_chain.workflow import run_simulation
from .metrics import BatchMetrics, MetricsCollector
from .plan import DEFAULT_PATTERN_CAP, SweepPlan
from .stats import summarize


logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "pattern_id",
    "pattern_bits",
    "throughput_bps",
    "replicate",
    "seed",
    "makespan_s",
]
SORT_KEYS = ["throughput_bps", "pattern_id", "replicate"]


@dataclass(frozen=True)
class SweepRecord:
    pattern_id: int
    pattern_bits: str
    throughput_bps: float
    replicate: int
    seed: int
    makespan_s: float


# (pattern_id, k, throughput_bps, ((replicate, seed), ...))
Batch = Tuple[int, int, float, Tuple[Tuple[int, int], ...]]


class BatchRunner:
    def __init__(self, scenario: Scenario, event_limit: int = DEFAULT_EVENT_LIMIT):
        self.scenario = scenario
        self.model = RttModel.from_scenario(scenario)
        self.event_limit = event_limit

    def run(self, batch: Batch) -> Dict[str, Any]:
        pattern_id, k, throughput, replicates = batch
        pattern = DistributionPattern.from_id(pattern_id, k)
        start = time.perf_counter()
        records = []
        for replicate, seed in replicates:
            try:
                result = run_simulation(
                    self.scenario,
                    pattern,
                    throughput_bps=throughput,
                    seed=seed,
                    event_limit=self.event_limit,
                    rtt_model=self.model,
                )
            except Exception as e:
                return {
                    "success": False,
                    "error": f"{type(e).__name__}: {e}",
                    "error_type": type(e).__name__,
                    "pattern_id": pattern_id,
                    "throughput_bps": throughput,
                    "replicate": replicate,
                    "seed": seed,
                    "start_time": start,
                    "end_time": time.perf_counter(),
                }
            records.append(
                SweepRecord(
                    pattern_id,
                    pattern.bit_string,
                    throughput,
                    replicate,
                    seed,
                    result.makespan_s,
                )
            )
        return {
            "success": True,
            "records": records,
            "start_time": start,
            "end_time": time.perf_counter(),
        }


_worker: Optional[BatchRunner] = None


def _init_worker(scenario_text: str, event_limit: int) -> None:
    global _worker  # noqa: PLW0603
    _worker = BatchRunner(load_scenario(scenario_text, source="<sweep>"), event_limit)


def _run_batch(batch: Batch) -> Dict[str, Any]:
    return _worker.run(batch)


@dataclass
class SweepResult:
    records: List[SweepRecord]
    plan: Optional[SweepPlan] = None
    metrics: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(r) for r in self.records], columns=SWEEP_COLUMNS)
        return _canonical(frame)

    def summary(self) -> pd.DataFrame:
        return summarize(self.to_frame())

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "SweepResult":
        records = [
            SweepRecord(
                int(row.pattern_id),
                str(row.pattern_bits),
                float(row.throughput_bps),
                int(row.replicate),
                int(row.seed),
                float(row.makespan_s),
            )
            for row in frame.itertuples(index=False)
        ]
        return cls(records)


def _canonical(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.astype(
        {
            "pattern_id": "int64",
            "pattern_bits": "str",
            "throughput_bps": "float64",
            "replicate": "int64",
            "seed": "uint64",
            "makespan_s": "float64",
        }
    )
    return frame.sort_values(SORT_KEYS, kind="stable").reset_index(drop=True)


def read_sweep_csv(path: Union[str, Path]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype={"pattern_bits": str, "seed": "uint64"})
    except pd.errors.EmptyDataError:
        raise ConfigurationError(f"sweep CSV {path} is empty") from None
    if list(frame.columns) != SWEEP_COLUMNS:
        raise ConfigurationError(
            f"sweep CSV {path} has columns {list(frame.columns)}, expected {SWEEP_COLUMNS}"
        )
    return _canonical(frame)


def _batches(scenario: Scenario, plan: SweepPlan, pattern_cap: int) -> List[Batch]:
    k = scenario.catalog.k
    grouped: Dict[Tuple[int, float], List[Tuple[int, int]]] = {}
    for cell in plan.cells(k, pattern_cap):
        key = (cell.pattern.pattern_id, cell.throughput_bps)
        grouped.setdefault(key, []).append((cell.replicate, cell.seed))
    return [
        (pattern_id, k, throughput, tuple(replicates))
        for (pattern_id, throughput), replicates in grouped.items()
    ]


class _Collector:
    def __init__(self, total: int, progress_every: int):
        self.total = total
        self.progress_every = max(1, progress_every)
        self.records: List[SweepRecord] = []
        self.metrics = MetricsCollector()
        self.done = 0

    def add(self, index: int, outcome: Dict[str, Any]) -> None:
        metric = BatchMetrics(
            batch_id=str(index),
            start_time=outcome["start_time"],
            end_time=outcome["end_time"],
            success=outcome["success"],
        )
        if not outcome["success"]:
            metric.error_type = outcome["error_type"]
            self.metrics.add_metric(metric)
            logger.error(f"❌ Sweep aborted: {outcome['error']}")
            raise SweepError(
                outcome["error"],
                outcome["pattern_id"],
                outcome["throughput_bps"],
                outcome["replicate"],
                outcome["seed"],
            )
        metric.simulations = len(outcome["records"])
        self.metrics.add_metric(metric)
        self.records.extend(outcome["records"])
        self.done += 1
        if self.done % self.progress_every == 0 or self.done == self.total:
            logger.info(
                f"📊 {self.done}/{self.total} cells, {len(self.records)} simulations"
            )


async def run_sweep_async(
    scenario: Scenario,
    plan: SweepPlan,
    jobs: int = 1,
    pattern_cap: int = DEFAULT_PATTERN_CAP,
    event_limit: int = DEFAULT_EVENT_LIMIT,
    progress_every: int = 64,
) -> SweepResult:
    batches = _batches(scenario, plan, pattern_cap)
    collector = _Collector(len(batches), progress_every)
    started = time.perf_counter()
    logger.info(
        f"🚀 Sweep of {len(batches)} cells x {plan.replicates} replicates "
        f"on {max(1, jobs)} worker(s)"
    )

    if jobs <= 1:
        runner = BatchRunner(scenario, event_limit)
        for index, batch in enumerate(batches):
            collector.add(index, runner.run(batch))
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_init_worker,
            initargs=(dump_scenario(scenario), event_limit),
        ) as pool:
            futures = [
                loop.run_in_executor(pool, _run_batch, batch) for batch in batches
            ]
            try:
                for index, future in enumerate(futures):
                    collector.add(index, await future)
            except SweepError:
                for future in futures:
                    future.cancel()
                raise

    wall = time.perf_counter() - started
    summary = collector.metrics.get_summary(wall_time_s=wall)
    logger.info(f"✅ Sweep finished in {wall:.1f}s: {summary}")
    records = sorted(
        collector.records,
        key=lambda r: (r.throughput_bps, r.pattern_id, r.replicate),
    )
    return SweepResult(records, plan, summary)


def run_sweep(
    scenario: Scenario,
    plan: SweepPlan,
    jobs: int = 1,
    pattern_cap: int = DEFAULT_PATTERN_CAP,
    event_limit: int = DEFAULT_EVENT_LIMIT,
    progress_every: int = 64,
) -> SweepResult:
    return asyncio.run(
        run_sweep_async(scenario, plan, jobs, pattern_cap, event_limit, progress_every)
    )
