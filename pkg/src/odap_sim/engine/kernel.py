"""Event calendar and simulated clock.

Events fire in ``(fire_at, seq)`` order: equal timestamps fire in the order
they were scheduled, so a run is fully reproducible.
"""

from dataclasses import dataclass, field
import heapq
import logging
from typing import TYPE_CHECKING, Callable, Dict, List, Optional

from ..errors import EngineInvariantError, LivelockError, SchedulingError
from .trace import TraceRecord


if TYPE_CHECKING:
    from .resources import Resource


logger = logging.getLogger(__name__)

DEFAULT_EVENT_LIMIT = 5_000_000


@dataclass
class Event:
    fire_at: float
    seq: int
    kind: str
    action: Callable[[], None]
    entity_id: str = ""
    resource_id: str = ""
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True


@dataclass
class ResourceStats:
    resource_id: str
    capacity: int
    max_queue_depth: int
    utilization: float
    acquisitions: int


@dataclass
class RunStatistics:
    clock: float
    events_processed: int
    resources: Dict[str, ResourceStats] = field(default_factory=dict)

    @property
    def max_queue_depths(self) -> Dict[str, int]:
        return {rid: r.max_queue_depth for rid, r in self.resources.items()}

    @property
    def utilization(self) -> Dict[str, float]:
        return {rid: r.utilization for rid, r in self.resources.items()}


class Engine:
    def __init__(self, event_limit: int = DEFAULT_EVENT_LIMIT, record_trace: bool = False):
        self.event_limit = event_limit
        self.record_trace = record_trace
        self.trace: List[TraceRecord] = []
        self.resources: Dict[str, "Resource"] = {}
        self._calendar: List[tuple] = []
        self._seq = 0
        self._now = 0.0
        self._processed = 0
        self._last_fired = 0.0

    @property
    def now(self) -> float:
        return self._now

    @property
    def pending(self) -> int:
        return sum(1 for *_, event in self._calendar if not event.cancelled)

    def schedule(
        self,
        fire_at: float,
        action: Callable[[], None],
        kind: str = "timer",
        entity_id: str = "",
        resource_id: str = "",
    ) -> Event:
        if fire_at < self._now:
            raise SchedulingError(
                f"cannot schedule {kind} at t={fire_at:g} before now={self._now:g}"
            )
        event = Event(fire_at, self._seq, kind, action, entity_id, resource_id)
        self._seq += 1
        heapq.heappush(self._calendar, (fire_at, event.seq, event))
        return event

    def schedule_in(
        self,
        delay: float,
        action: Callable[[], None],
        kind: str = "timer",
        entity_id: str = "",
        resource_id: str = "",
    ) -> Event:
        return self.schedule(self._now + delay, action, kind, entity_id, resource_id)

    def cancel(self, event: Event) -> None:
        event.cancel()

    def record(self, kind: str, entity_id: str = "", resource_id: str = "") -> None:
        if self.record_trace:
            self.trace.append(TraceRecord(self._now, kind, entity_id, resource_id))

    def register(self, resource: "Resource") -> None:
        self.resources[resource.id] = resource

    def run_until(self, predicate: Optional[Callable[[], bool]] = None) -> RunStatistics:
        """Process events until ``predicate()`` holds or the calendar drains."""
        while not (predicate is not None and predicate()) and self._calendar:
            fire_at, _, event = heapq.heappop(self._calendar)
            if event.cancelled:
                continue
            if fire_at < self._last_fired:
                raise EngineInvariantError(
                    f"{event.kind} at t={fire_at:g} fired after t={self._last_fired:g}"
                )
            self._last_fired = fire_at
            self._now = fire_at
            self._processed += 1
            if self._processed > self.event_limit:
                raise LivelockError(
                    f"event limit {self.event_limit} exceeded at t={self._now:g}"
                )
            event.action()
        return self.statistics()

    def statistics(self) -> RunStatistics:
        return RunStatistics(
            clock=self._now,
            events_processed=self._processed,
            resources={
                rid: resource.stats(self._now) for rid, resource in self.resources.items()
            },
        )
