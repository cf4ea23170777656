"""Deterministic report documents: csv, json and markdown.

Every number is written with repr(), so all three formats carry identical digits
and csv/json parse back to the exact floats.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any

from report.views import METRIC_LABELS, REPORT_METRICS, Comparison, MetricsReport

FORMATS = ("csv", "json", "markdown")
_ALIASES = {"markdown-table": "markdown", "md": "markdown"}

# Non-numeric rows at the top of a report CSV.
_REPORT_HEADER_FIELDS = ("policy", "scenario", "privacy_risk", "duration_s", "replications", "tasks_per_replication")


class UnknownFormatError(ValueError):
    pass


def normalize_format(fmt: str) -> str:
    key = fmt.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in FORMATS:
        raise UnknownFormatError(f"Unknown format '{fmt}'. Expected one of: csv, json, markdown")
    return key


def _num(value: float | int | None) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _markdown(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _report_json(report: MetricsReport) -> dict[str, Any]:
    """Flat JSON object: the report fields, then one std_<metric> per scalar."""
    document = report.model_dump(mode="json", exclude={"std"})
    for name in REPORT_METRICS:
        document[f"std_{name}"] = report.std.get(name)
    return document


def _report_document(report: MetricsReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_report_json(report), indent=2) + "\n"
    if fmt == "csv":
        rows = [["metric", "value", "std"]]
        rows += [[name, _num(getattr(report, name)), ""] for name in _REPORT_HEADER_FIELDS]
        rows += [[name, _num(report.value(name)), _num(report.std.get(name))] for name in REPORT_METRICS]
        return _csv(rows)
    title = f"### {report.policy}" + (f" on {report.scenario}" if report.scenario else "")
    meta = (
        f"{report.replications} replication(s) of {report.duration_s:g} s, "
        f"privacy risk {report.privacy_risk}. Processing time is computation only; latency is end to end.\n"
    )
    rows = [[METRIC_LABELS[name], _num(report.value(name)), _num(report.std.get(name))] for name in REPORT_METRICS]
    return f"{title}\n\n{meta}\n" + _markdown(["Metric", "Mean", "Std"], rows)


def _comparison_document(comparison: Comparison, fmt: str) -> str:
    policies = comparison.policies
    candidates = [p for p in policies if p != comparison.baseline]
    if fmt == "json":
        return json.dumps(comparison.model_dump(mode="json"), indent=2) + "\n"

    header = ["metric", *policies, *(f"{p} vs {comparison.baseline} (%)" for p in candidates)]
    body = []
    for row in comparison.rows:
        body.append(
            [
                row.metric if fmt == "csv" else row.label,
                *(_num(row.values[p]) for p in policies),
                *(_num(row.deltas[p]) for p in candidates),
            ]
        )
    if fmt == "csv":
        return _csv([header, *body])
    header[0] = "Metric"
    return f"Reduction relative to {comparison.baseline}; positive means lower than the baseline.\n\n" + _markdown(
        header, body
    )


def emit(document: MetricsReport | Comparison, fmt: str) -> str:
    fmt = normalize_format(fmt)
    if isinstance(document, MetricsReport):
        return _report_document(document, fmt)
    if isinstance(document, Comparison):
        return _comparison_document(document, fmt)
    raise TypeError(f"cannot emit {type(document).__name__}")


def parse_report_csv(text: str) -> dict[str, Any]:
    """Read a report CSV back; numeric metrics become floats, std values go under 'std'."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["metric", "value", "std"]:
        raise ValueError(f"not a report CSV (header {header})")
    parsed: dict[str, Any] = {"std": {}}
    for metric, value, spread in reader:
        if metric in ("policy", "scenario", "privacy_risk"):
            parsed[metric] = value
        elif metric == "replications":
            parsed[metric] = int(value)
        else:
            parsed[metric] = float(value)
            if spread:
                parsed["std"][metric] = float(spread)
    return parsed


def parse_report_json(text: str) -> MetricsReport:
    """Rebuild a MetricsReport from its flat JSON document."""
    data = json.loads(text)
    if not isinstance(data, dict) or "policy" not in data:
        raise ValueError("not a report JSON document")
    std = {key.removeprefix("std_"): data.pop(key) for key in list(data) if key.startswith("std_")}
    return MetricsReport.model_validate({**data, "std": {k: v for k, v in std.items() if v is not None}})
