"""Exclusive resources with strict FIFO queues."""

from collections import Counter, deque
from dataclasses import dataclass
import logging
from typing import Callable, Deque, Optional

from ..errors import EngineInvariantError
from .kernel import Engine, ResourceStats


logger = logging.getLogger(__name__)

Callback = Optional[Callable[[], None]]


@dataclass
class _Request:
    holder: str
    duration: Optional[float]
    on_granted: Callback
    on_done: Callback


class Resource:
    """A resource of fixed capacity; waiting requests are granted in arrival order.

    ``acquire`` never blocks the caller: the grant (and ``on_granted``) happens
    immediately when capacity is free, otherwise when an earlier holder releases.
    With a ``duration`` the hold ends automatically and ``on_done`` fires after
    the release.
    """

    def __init__(self, engine: Engine, resource_id: str, capacity: int = 1):
        if capacity < 1:
            raise ValueError(f"capacity of {resource_id} must be at least 1")
        self.engine = engine
        self.id = resource_id
        self.capacity = capacity
        self.holders: Counter = Counter()
        self.queue: Deque[_Request] = deque()
        self.acquisitions = 0
        self.max_queue_depth = 0
        self._in_use = 0
        self._busy_area = 0.0
        self._last_change = 0.0
        engine.register(self)

    @property
    def in_use(self) -> int:
        return self._in_use

    def acquire(
        self,
        holder: str,
        duration: Optional[float] = None,
        on_granted: Callback = None,
        on_done: Callback = None,
    ) -> None:
        request = _Request(holder, duration, on_granted, on_done)
        if self._in_use < self.capacity and not self.queue:
            self._grant(request)
            return
        self.queue.append(request)
        self.max_queue_depth = max(self.max_queue_depth, len(self.queue))
        logger.debug(f"{self.id}: {holder} queued (depth {len(self.queue)})")

    def release(self, holder: str) -> None:
        if self.holders[holder] <= 0:
            raise EngineInvariantError(
                f"{holder} released {self.id} without holding it (t={self.engine.now:g})"
            )
        self._accumulate()
        self.holders[holder] -= 1
        if not self.holders[holder]:
            del self.holders[holder]
        self._in_use -= 1
        self.engine.record("release", holder, self.id)
        while self.queue and self._in_use < self.capacity:
            self._grant(self.queue.popleft())

    def _grant(self, request: _Request) -> None:
        self._accumulate()
        self._in_use += 1
        self.holders[request.holder] += 1
        self.acquisitions += 1
        self.engine.record("acquire", request.holder, self.id)
        if request.duration is not None:
            self.engine.schedule_in(
                request.duration,
                lambda: self._finish(request),
                kind="hold_end",
                entity_id=request.holder,
                resource_id=self.id,
            )
        if request.on_granted is not None:
            request.on_granted()

    def _finish(self, request: _Request) -> None:
        self.release(request.holder)
        if request.on_done is not None:
            request.on_done()

    def _accumulate(self) -> None:
        now = self.engine.now
        self._busy_area += self._in_use * (now - self._last_change)
        self._last_change = now

    def stats(self, now: float) -> ResourceStats:
        area = self._busy_area + self._in_use * (now - self._last_change)
        utilization = area / (self.capacity * now) if now > 0 else 0.0
        return ResourceStats(
            resource_id=self.id,
            capacity=self.capacity,
            max_queue_depth=self.max_queue_depth,
            utilization=min(max(utilization, 0.0), 1.0),
            acquisitions=self.acquisitions,
        )
