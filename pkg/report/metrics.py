"""Trace aggregation into benchmark metrics, and policy-vs-baseline deltas."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from core.views import Layer
from report.views import (
    COMPARISON_METRICS,
    METRIC_LABELS,
    REPORT_METRICS,
    Comparison,
    ComparisonRow,
    MetricsReport,
    privacy_risk_label,
)
from sim.views import TraceEvent

logger = logging.getLogger(__name__)

MB_PER_GB = 1000.0
JOULES_PER_KWH = 3.6e6
SECONDS_PER_HOUR = 3600.0


class EmptyTraceError(ValueError):
    pass


class UnknownBaselineError(ValueError):
    pass


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _percent(count: int, total: int) -> float:
    return 100.0 * count / total if total else 0.0


def _layer_mean(values: Sequence[float]) -> float:
    # nan marks a layer with no served tasks in this run
    return math.fsum(values) / len(values) if values else math.nan


def replication_metrics(events: Sequence[TraceEvent], duration: float) -> dict[str, float]:
    """Every report scalar for a single run. Per-layer means are nan for a layer that served nothing."""
    served = [e for e in events if not e.dropped]
    latencies_ms = [e.total_latency * 1000.0 for e in served]
    sensitive = [e for e in served if e.privacy == 1]
    by_layer = {layer: [e for e in served if e.layer is layer] for layer in Layer}
    layer_counts = {layer: len(by_layer[layer]) for layer in Layer}
    per_layer: dict[str, float] = {}
    for layer, placed in by_layer.items():
        per_layer[f"{layer.label}_mean_latency_ms"] = _layer_mean([e.total_latency * 1000.0 for e in placed])
        per_layer[f"{layer.label}_mean_processing_ms"] = _layer_mean([e.proc_time * 1000.0 for e in placed])

    return {
        "mean_latency_ms": _mean(latencies_ms),
        "bandwidth_gb_per_hour": math.fsum(e.bytes_transferred for e in served)
        / MB_PER_GB
        / (duration / SECONDS_PER_HOUR),
        "energy_kwh": math.fsum(e.energy for e in served) / JOULES_PER_KWH,
        "mean_processing_time_s": _mean([e.proc_time for e in served]),
        "median_latency_ms": float(np.median(latencies_ms)) if latencies_ms else 0.0,
        "p95_latency_ms": float(np.percentile(latencies_ms, 95)) if latencies_ms else 0.0,
        **per_layer,
        "edge_share": _percent(layer_counts[Layer.EDGE], len(served)),
        "fog_share": _percent(layer_counts[Layer.FOG], len(served)),
        "cloud_share": _percent(layer_counts[Layer.CLOUD], len(served)),
        "sensitive_local_fraction": _percent(
            sum(1 for e in sensitive if e.layer in (Layer.EDGE, Layer.FOG)), len(sensitive)
        ),
        "mean_encryption_overhead_ms": _mean([e.enc_time * 1000.0 for e in sensitive]),
        "reroute_rate": _percent(sum(1 for e in events if e.rerouted), len(events)),
        "mean_reward": _mean([e.reward for e in served]),
        "mean_accuracy": _mean([e.accuracy for e in served]),
        "deadline_miss_rate": _percent(sum(1 for e in served if not e.deadline_met), len(served)),
        "drop_rate": _percent(sum(1 for e in events if e.dropped), len(events)),
    }


def compute_metrics(
    traces: Sequence[Sequence[TraceEvent]],
    policy: str,
    duration: float,
    scenario: str = "",
) -> MetricsReport:
    """Average per-replication scalars; the population std of each goes into `std`.

    Per-layer means average only the runs in which that layer served tasks.
    """
    runs = [list(trace) for trace in traces if trace]
    if len(runs) < len(traces):
        logger.warning("%s: ignoring %d empty trace(s)", policy, len(traces) - len(runs))
    if not runs:
        raise EmptyTraceError(f"{policy}: no events to aggregate; signals a failed run upstream")

    per_run = [replication_metrics(run, duration) for run in runs]
    values: dict[str, float] = {}
    std: dict[str, float] = {}
    for name in REPORT_METRICS:
        samples = [m[name] for m in per_run if not math.isnan(m[name])]
        values[name] = math.fsum(samples) / len(samples) if samples else 0.0
        std[name] = float(np.std(samples)) if samples else 0.0

    return MetricsReport(
        policy=policy,
        scenario=scenario,
        duration_s=duration,
        replications=len(runs),
        tasks_per_replication=_mean([float(len(run)) for run in runs]),
        privacy_risk=privacy_risk_label(values["sensitive_local_fraction"]),
        std=std,
        **values,
    )


def percent_reduction(baseline: float, candidate: float) -> float | None:
    """(baseline - candidate) / baseline in percent; positive means the candidate is lower."""
    if candidate == baseline:
        return 0.0
    if baseline == 0.0:
        return None
    return (baseline - candidate) / baseline * 100.0


def compare(
    reports: Sequence[MetricsReport],
    baseline: str,
    metrics: Sequence[str] = COMPARISON_METRICS,
) -> Comparison:
    names = [r.policy for r in reports]
    if len(set(names)) != len(names):
        raise ValueError(f"policy names must be unique in a comparison, got {names}")
    by_name = {r.policy: r for r in reports}
    if baseline not in by_name:
        raise UnknownBaselineError(f"baseline '{baseline}' not among compared policies: {', '.join(names)}")

    base = by_name[baseline]
    rows = []
    for metric in metrics:
        values = {r.policy: r.value(metric) for r in reports}
        deltas = {r.policy: percent_reduction(base.value(metric), r.value(metric)) for r in reports}
        rows.append(ComparisonRow(metric=metric, label=METRIC_LABELS[metric], values=values, deltas=deltas))
    return Comparison(baseline=baseline, policies=names, rows=rows)
