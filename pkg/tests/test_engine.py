from collections import Counter
import heapq

import numpy as np
import pytest

from odap_sim.engine import Engine, Event, Resource, TraceRecord, read_trace, write_trace
from odap_sim.errors import EngineInvariantError, LivelockError, SchedulingError


class TestEventCalendar:
    def test_empty_calendar(self):
        stats = Engine().run_until()

        assert stats.clock == 0.0
        assert stats.events_processed == 0

    def test_single_event_then_stop(self):
        engine = Engine()
        fired = []
        engine.schedule(5.0, lambda: fired.append(engine.now))

        stats = engine.run_until(lambda: bool(fired))

        assert stats.clock == 5.0
        assert fired == [5.0]

    def test_equal_times_fire_in_insertion_order(self):
        engine = Engine()
        order = []
        for label in "abc":
            engine.schedule(2.0, lambda label=label: order.append(label))

        engine.run_until()

        assert order == ["a", "b", "c"]

    def test_zero_delay_fires_before_later_events(self):
        engine = Engine()
        order = []
        engine.schedule(1.0, lambda: order.append("later"))
        engine.schedule_in(0.0, lambda: order.append("now"))

        engine.run_until()

        assert order == ["now", "later"]

    def test_schedule_in_the_past(self):
        engine = Engine()
        engine.schedule(5.0, lambda: None)
        engine.run_until()

        with pytest.raises(SchedulingError):
            engine.schedule(4.0, lambda: None)

    def test_cancelled_event_never_fires(self):
        engine = Engine()
        fired = []
        event = engine.schedule(1.0, lambda: fired.append(1))
        engine.cancel(event)

        stats = engine.run_until()

        assert fired == []
        assert stats.events_processed == 0
        assert engine.pending == 0

    def test_out_of_order_calendar_entry(self):
        engine = Engine()
        engine.schedule(5.0, lambda: None)
        engine.run_until()
        stale = Event(1.0, 99, "stale", lambda: None)
        heapq.heappush(engine._calendar, (stale.fire_at, stale.seq, stale))

        with pytest.raises(EngineInvariantError, match="stale"):
            engine.run_until()

    def test_event_limit_guard(self):
        engine = Engine(event_limit=10)

        def again():
            engine.schedule_in(1.0, again)

        engine.schedule(0.0, again)

        with pytest.raises(LivelockError):
            engine.run_until()

    def test_randomized_stress_is_causal_and_fifo(self):
        rng = np.random.default_rng(42)
        engine = Engine()
        fired = []

        def spawn(depth):
            fired.append((engine.now, depth))
            if depth < 3:
                for _ in range(2):
                    engine.schedule_in(float(rng.integers(0, 3)), lambda: spawn(depth + 1))

        seeds = [engine.schedule(float(t), lambda: spawn(0)) for t in rng.integers(0, 50, 67)]

        stats = engine.run_until()

        assert stats.events_processed == len(seeds) * 15
        assert stats.events_processed > 1000
        times = [t for t, _ in fired]
        assert times == sorted(times)


class TestResources:
    def test_free_resource_hold(self):
        engine = Engine(record_trace=True)
        db = Resource(engine, "DB1")
        done = []

        db.acquire("p1", 3.0, on_done=lambda: done.append(engine.now))
        engine.run_until()

        assert done == [3.0]
        assert [(r.time_s, r.event_kind) for r in engine.trace] == [
            (0.0, "acquire"),
            (3.0, "release"),
        ]

    def test_three_holds_complete_in_fifo_order(self):
        engine = Engine()
        db = Resource(engine, "DB1")
        done = []
        for name in ("a", "b", "c"):
            db.acquire(name, 10.0, on_done=lambda name=name: done.append((name, engine.now)))

        stats = engine.run_until()

        assert done == [("a", 10.0), ("b", 20.0), ("c", 30.0)]
        assert stats.resources["DB1"].max_queue_depth == 2
        assert stats.resources["DB1"].utilization == pytest.approx(1.0)

    def test_contended_second_hold(self):
        engine = Engine()
        db = Resource(engine, "DB1")
        granted = {}
        db.acquire("first", 5.0, on_granted=lambda: granted.setdefault("first", engine.now))
        engine.schedule(
            1.0,
            lambda: db.acquire(
                "second", 5.0, on_granted=lambda: granted.setdefault("second", engine.now)
            ),
        )

        stats = engine.run_until()

        assert granted == {"first": 0.0, "second": 5.0}
        assert stats.clock == 10.0

    def test_release_twice_is_fatal(self):
        engine = Engine()
        db = Resource(engine, "DB1")
        db.acquire("p1")
        db.release("p1")

        with pytest.raises(EngineInvariantError):
            db.release("p1")

    def test_capacity_two(self):
        engine = Engine()
        pool = Resource(engine, "pool", capacity=2)
        done = []
        for name in "abc":
            pool.acquire(name, 4.0, on_done=lambda name=name: done.append((name, engine.now)))

        engine.run_until()

        assert done == [("a", 4.0), ("b", 4.0), ("c", 8.0)]

    def test_utilization_partial(self):
        engine = Engine()
        db = Resource(engine, "DB1")
        db.acquire("p1", 2.0)
        engine.schedule(8.0, lambda: None)

        stats = engine.run_until()

        assert stats.resources["DB1"].utilization == pytest.approx(0.25)

    def test_randomized_holds_conserve_resources(self):
        rng = np.random.default_rng(9)
        engine = Engine(record_trace=True)
        resources = [Resource(engine, f"R{i}", capacity=int(rng.integers(1, 3))) for i in range(4)]
        peak = Counter()

        def check(resource):
            peak[resource.id] = max(peak[resource.id], resource.in_use)
            assert resource.in_use <= resource.capacity

        for n in range(1000):
            resource = resources[int(rng.integers(0, 4))]
            engine.schedule(
                float(rng.uniform(0, 100)),
                lambda resource=resource, n=n: resource.acquire(
                    f"h{n}",
                    float(rng.uniform(0.1, 2.0)),
                    on_granted=lambda resource=resource: check(resource),
                ),
            )

        stats = engine.run_until()

        kinds = Counter(record.event_kind for record in engine.trace)
        assert kinds["acquire"] == kinds["release"] == 1000
        for resource_stats in stats.resources.values():
            assert 0.0 <= resource_stats.utilization <= 1.0
        times = [record.time_s for record in engine.trace]
        assert times == sorted(times)


class TestTrace:
    def test_trace_file_round_trip(self, temp_workspace):
        records = [
            TraceRecord(0.0, "acquire", "cutting1#1", "DB1"),
            TraceRecord(0.0036200000000000004, "release", "cutting1#1", "DB1"),
        ]

        path = write_trace(records, temp_workspace / "trace.csv")

        assert path.read_text().splitlines()[0] == "time_s,event_kind,entity_id,resource_id"
        assert read_trace(path) == records
