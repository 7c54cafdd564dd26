"""Line-oriented event trace: ``time_s,event_kind,entity_id,resource_id``."""

import csv
from dataclasses import astuple, dataclass
import io
from pathlib import Path
from typing import Iterable, List, Union


TRACE_HEADER = ("time_s", "event_kind", "entity_id", "resource_id")


@dataclass(frozen=True)
class TraceRecord:
    time_s: float
    event_kind: str
    entity_id: str = ""
    resource_id: str = ""


def format_trace(records: Iterable[TraceRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for record in records:
        writer.writerow((repr(record.time_s), *astuple(record)[1:]))
    return buffer.getvalue()


def write_trace(records: Iterable[TraceRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_trace(records), encoding="utf-8")
    return path


def read_trace(path: Union[str, Path]) -> List[TraceRecord]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        return [
            TraceRecord(
                float(row["time_s"]),
                row["event_kind"],
                row["entity_id"],
                row["resource_id"],
            )
            for row in reader
        ]
