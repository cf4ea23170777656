"""Trace export. CSV column order is fixed; NDJSON carries the same fields per line.

Columns (times in seconds, sizes in MB, energy in J):
    task_id, arrival_time, category, privacy, latency_req, complexity, data_size,
    layer, original_layer, rerouted, dropped, node_index, queue_wait, proc_time,
    comm_time, enc_time, total_latency, energy, reward, accuracy,
    bytes_edge_fog, bytes_fog_cloud, bytes_transferred, deadline_met
Layers are written as labels (edge/fog/cloud, empty when absent); flags as 0/1.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable

from sim.views import TraceEvent

TRACE_COLUMNS = (
    "task_id",
    "arrival_time",
    "category",
    "privacy",
    "latency_req",
    "complexity",
    "data_size",
    "layer",
    "original_layer",
    "rerouted",
    "dropped",
    "node_index",
    "queue_wait",
    "proc_time",
    "comm_time",
    "enc_time",
    "total_latency",
    "energy",
    "reward",
    "accuracy",
    "bytes_edge_fog",
    "bytes_fog_cloud",
    "bytes_transferred",
    "deadline_met",
)

_FLOAT_COLUMNS = {
    "arrival_time",
    "latency_req",
    "complexity",
    "data_size",
    "queue_wait",
    "proc_time",
    "comm_time",
    "enc_time",
    "total_latency",
    "energy",
    "reward",
    "accuracy",
    "bytes_edge_fog",
    "bytes_fog_cloud",
    "bytes_transferred",
}
_INT_COLUMNS = {"privacy", "rerouted", "dropped", "node_index", "deadline_met"}


def trace_row(event: TraceEvent) -> dict[str, Any]:
    return {
        "task_id": event.task_id,
        "arrival_time": event.arrival_time,
        "category": event.category.value,
        "privacy": event.privacy,
        "latency_req": event.latency_req,
        "complexity": event.complexity,
        "data_size": event.data_size,
        "layer": event.layer.label if event.layer is not None else "",
        "original_layer": event.original_layer.label if event.original_layer is not None else "",
        "rerouted": int(event.rerouted),
        "dropped": int(event.dropped),
        "node_index": event.node_index,
        "queue_wait": event.queue_wait,
        "proc_time": event.proc_time,
        "comm_time": event.comm_time,
        "enc_time": event.enc_time,
        "total_latency": event.total_latency,
        "energy": event.energy,
        "reward": event.reward,
        "accuracy": event.accuracy,
        "bytes_edge_fog": event.bytes_edge_fog,
        "bytes_fog_cloud": event.bytes_fog_cloud,
        "bytes_transferred": event.bytes_transferred,
        "deadline_met": int(event.deadline_met),
    }


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def traces_to_csv(events: Iterable[TraceEvent]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for event in events:
        row = trace_row(event)
        writer.writerow([_cell(row[column]) for column in TRACE_COLUMNS])
    return buffer.getvalue()


def traces_to_ndjson(events: Iterable[TraceEvent]) -> str:
    return "".join(json.dumps(trace_row(event)) + "\n" for event in events)


def write_trace_csv(events: Iterable[TraceEvent], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(traces_to_csv(events), encoding="utf-8")
    return path


def write_trace_ndjson(events: Iterable[TraceEvent], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(traces_to_ndjson(events), encoding="utf-8")
    return path


def parse_trace_csv(text: str) -> list[dict[str, Any]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header: {reader.fieldnames}")
    rows = []
    for raw in reader:
        row: dict[str, Any] = dict(raw)
        for column in _FLOAT_COLUMNS:
            row[column] = float(raw[column])
        for column in _INT_COLUMNS:
            row[column] = int(raw[column])
        rows.append(row)
    return rows


def read_trace_csv(path: str | Path) -> list[dict[str, Any]]:
    return parse_trace_csv(Path(path).read_text(encoding="utf-8"))
