from .kernel import DEFAULT_EVENT_LIMIT, Engine, Event, ResourceStats, RunStatistics
from .resources import Resource
from .trace import TraceRecord, format_trace, read_trace, write_trace


__all__ = [
    "DEFAULT_EVENT_LIMIT",
    "Engine",
    "Event",
    "Resource",
    "ResourceStats",
    "RunStatistics",
    "TraceRecord",
    "format_trace",
    "read_trace",
    "write_trace",
]
