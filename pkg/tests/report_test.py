import json
import math
from collections import Counter

import pytest
from pydantic import ValidationError
from rich.console import Console

from core.views import Layer, TaskCategory
from policy.orchestrator import PolicyBinding
from policy.views import PolicyKind
from report.console import render_comparison, render_report
from report.emit import UnknownFormatError, emit, normalize_format, parse_report_csv, parse_report_json
from report.metrics import (
    EmptyTraceError,
    UnknownBaselineError,
    compare,
    compute_metrics,
    percent_reduction,
)
from report.views import REPORT_METRICS, MetricsReport, privacy_risk_label
from sim.engine import run
from sim.trace_io import read_trace_csv, write_trace_csv
from sim.views import TraceEvent


def event(layer=Layer.CLOUD, privacy=0, **values) -> TraceEvent:
    return TraceEvent(
        task_id=values.pop("task_id", "e"),
        arrival_time=0.0,
        category=TaskCategory.REALTIME,
        privacy=privacy,
        latency_req=0.1,
        complexity=1e6,
        data_size=0.01,
        layer=layer,
        **values,
    )


def report(policy: str, **values) -> MetricsReport:
    fields = {name: 0.0 for name in REPORT_METRICS}
    fields.update(cloud_share=100.0, mean_accuracy=0.9)
    fields.update(values)
    return MetricsReport(
        policy=policy,
        scenario="unit",
        duration_s=3600.0,
        replications=1,
        tasks_per_replication=10.0,
        privacy_risk="High",
        **fields,
    )


@pytest.fixture
def city_report(small_city):
    traces = [run(small_city.model_copy(update={"seed": s}), PolicyBinding(PolicyKind.THRESHOLD)) for s in (0, 1)]
    return compute_metrics(traces, "threshold-hipa", small_city.duration, scenario=small_city.name)


class TestComputeMetrics:
    def test_cloud_only_shares(self, small_city):
        trace = run(small_city, PolicyBinding(PolicyKind.CLOUD_ONLY))
        result = compute_metrics([trace], "cloud-only", small_city.duration)
        assert (result.edge_share, result.fog_share, result.cloud_share) == (0.0, 0.0, 100.0)
        assert result.sensitive_local_fraction == 0.0
        assert result.privacy_risk == "High"

    def test_energy_in_kwh(self):
        result = compute_metrics([[event(energy=3600.0)]], "x", duration=3600.0)
        assert result.energy_kwh == pytest.approx(0.001, rel=1e-12)

    def test_bandwidth_per_hour(self):
        trace = [event(bytes_edge_fog=500.0, bytes_fog_cloud=500.0)]
        assert compute_metrics([trace], "x", duration=1800.0).bandwidth_gb_per_hour == pytest.approx(2.0)

    def test_shares_and_drops(self):
        trace = [
            event(Layer.EDGE, privacy=1),
            event(Layer.FOG, privacy=1),
            event(Layer.CLOUD, privacy=1),
            event(Layer.CLOUD),
            event(None, dropped=True),
        ]
        result = compute_metrics([trace], "x", duration=3600.0)
        assert (result.edge_share, result.fog_share, result.cloud_share) == (25.0, 25.0, 50.0)
        assert result.drop_rate == 20.0
        assert result.sensitive_local_fraction == pytest.approx(200.0 / 3.0)
        assert result.privacy_risk == "Low"

    def test_no_sensitive_tasks(self):
        result = compute_metrics([[event(Layer.EDGE)]], "x", duration=3600.0)
        assert result.sensitive_local_fraction == 0.0
        assert result.mean_encryption_overhead_ms == 0.0

    def test_averages_across_replications(self):
        traces = [[event(total_latency=0.010)], [event(total_latency=0.020)]]
        result = compute_metrics(traces, "x", duration=3600.0)
        assert result.mean_latency_ms == pytest.approx(15.0)
        assert result.std["mean_latency_ms"] == pytest.approx(5.0)
        assert result.replications == 2

    def test_deadline_and_reroutes(self):
        trace = [
            event(total_latency=0.05, deadline_met=True),
            event(total_latency=0.50, deadline_met=False, rerouted=True, original_layer=Layer.FOG),
        ]
        result = compute_metrics([trace], "x", duration=3600.0)
        assert result.deadline_miss_rate == 50.0
        assert result.reroute_rate == 50.0

    def test_empty_input(self):
        with pytest.raises(EmptyTraceError, match="failed run upstream"):
            compute_metrics([], "x", duration=3600.0)
        with pytest.raises(EmptyTraceError):
            compute_metrics([[], []], "x", duration=3600.0)

    def test_recomputed_from_trace_csv(self, tmp_path, small_city):
        events = run(small_city, PolicyBinding(PolicyKind.THRESHOLD))
        rows = read_trace_csv(write_trace_csv(events, tmp_path / "trace.csv"))
        served = [row for row in rows if not row["dropped"]]
        result = compute_metrics([events], "threshold-hipa", small_city.duration)

        latency = sum(row["total_latency"] for row in served) * 1000.0 / len(served)
        gigabytes = sum(row["bytes_transferred"] for row in served) / 1000.0
        joules = sum(row["energy"] for row in served)
        layers = Counter(row["layer"] for row in served)

        assert result.mean_latency_ms == pytest.approx(latency, rel=1e-12)
        assert result.bandwidth_gb_per_hour == pytest.approx(gigabytes * 3600.0 / small_city.duration, rel=1e-12)
        assert result.energy_kwh == pytest.approx(joules / 3.6e6, rel=1e-12)
        assert result.edge_share == pytest.approx(100.0 * layers["edge"] / len(served))
        assert math.isclose(result.edge_share + result.fog_share + result.cloud_share, 100.0, abs_tol=1e-9)

    def test_per_layer_timing_from_trace_csv(self, tmp_path, small_city):
        events = run(small_city, PolicyBinding(PolicyKind.THRESHOLD))
        rows = read_trace_csv(write_trace_csv(events, tmp_path / "trace.csv"))
        result = compute_metrics([events], "threshold-hipa", small_city.duration)
        for label in ("edge", "fog", "cloud"):
            placed = [row for row in rows if row["layer"] == label and not row["dropped"]]
            latency = sum(row["total_latency"] for row in placed) * 1000.0 / len(placed) if placed else 0.0
            processing = sum(row["proc_time"] for row in placed) * 1000.0 / len(placed) if placed else 0.0
            assert result.value(f"{label}_mean_latency_ms") == pytest.approx(latency, rel=1e-12)
            assert result.value(f"{label}_mean_processing_ms") == pytest.approx(processing, rel=1e-12)

    def test_per_layer_timing(self):
        trace = [
            event(Layer.EDGE, total_latency=0.004, proc_time=0.002),
            event(Layer.EDGE, total_latency=0.008, proc_time=0.004),
            event(Layer.CLOUD, total_latency=0.200, proc_time=0.050),
        ]
        result = compute_metrics([trace], "x", duration=3600.0)
        assert result.edge_mean_latency_ms == pytest.approx(6.0)
        assert result.edge_mean_processing_ms == pytest.approx(3.0)
        assert result.cloud_mean_latency_ms == pytest.approx(200.0)
        assert result.cloud_mean_processing_ms == pytest.approx(50.0)
        assert result.fog_mean_latency_ms == 0.0 and result.fog_mean_processing_ms == 0.0

    def test_per_layer_timing_skips_runs_without_that_layer(self):
        traces = [[event(Layer.FOG, total_latency=0.030)], [event(Layer.CLOUD, total_latency=0.100)]]
        result = compute_metrics(traces, "x", duration=3600.0)
        assert result.fog_mean_latency_ms == pytest.approx(30.0)
        assert result.std["fog_mean_latency_ms"] == 0.0
        assert result.cloud_mean_latency_ms == pytest.approx(100.0)
        assert result.mean_latency_ms == pytest.approx(65.0)

    @pytest.mark.parametrize("fraction, label", [(50.0, "Low"), (49.9, "Medium"), (20.0, "Medium"), (19.9, "High")])
    def test_privacy_risk_bands(self, fraction, label):
        assert privacy_risk_label(fraction) == label

    def test_shares_must_partition(self):
        with pytest.raises(ValidationError, match="sum to 100"):
            report("x", edge_share=10.0, cloud_share=80.0)


class TestCompare:
    def test_percent_reduction(self):
        assert percent_reduction(10.0, 6.5) == pytest.approx(35.0)
        assert percent_reduction(200.0, 150.0) == pytest.approx(25.0)
        assert percent_reduction(10.0, 12.0) == pytest.approx(-20.0)
        assert percent_reduction(0.0, 0.0) == 0.0
        assert percent_reduction(0.0, 4.0) is None

    def test_deltas(self):
        base = report("cloud-only", mean_latency_ms=10.0, bandwidth_gb_per_hour=200.0)
        rl = report("rl-hipa", mean_latency_ms=6.5, bandwidth_gb_per_hour=150.0, edge_share=40.0, cloud_share=60.0)
        comparison = compare([base, rl], "cloud-only")
        assert comparison.policies == ["cloud-only", "rl-hipa"]
        assert comparison.row("mean_latency_ms").deltas["rl-hipa"] == pytest.approx(35.0)
        assert comparison.row("bandwidth_gb_per_hour").deltas["rl-hipa"] == pytest.approx(25.0)
        assert comparison.row("edge_share").deltas["rl-hipa"] is None
        assert comparison.row("mean_latency_ms").values == {"cloud-only": 10.0, "rl-hipa": 6.5}

    def test_baseline_against_itself_is_zero(self, city_report):
        comparison = compare([city_report], city_report.policy)
        assert all(row.deltas[city_report.policy] == 0.0 for row in comparison.rows)

    def test_swapping_flips_sign(self):
        a = report("a", mean_latency_ms=10.0)
        b = report("b", mean_latency_ms=8.0)
        forward = compare([a, b], "a").row("mean_latency_ms").deltas["b"]
        backward = compare([a, b], "b").row("mean_latency_ms").deltas["a"]
        assert forward > 0 > backward
        assert forward * 10.0 == pytest.approx(-backward * 8.0)

    def test_unknown_baseline(self):
        with pytest.raises(UnknownBaselineError, match="static"):
            compare([report("cloud-only")], "static")

    def test_duplicate_policies(self):
        with pytest.raises(ValueError, match="unique"):
            compare([report("a"), report("a")], "a")

    def test_unknown_metric(self):
        with pytest.raises(KeyError):
            report("a").value("throughput")


class TestEmit:
    @pytest.mark.parametrize("fmt", ["csv", "json", "markdown"])
    def test_deterministic(self, city_report, fmt):
        assert emit(city_report, fmt) == emit(city_report, fmt)

    def test_csv_round_trip(self, city_report):
        parsed = parse_report_csv(emit(city_report, "csv"))
        for name in REPORT_METRICS:
            assert parsed[name] == city_report.value(name)
            assert parsed["std"][name] == city_report.std[name]
        assert parsed["policy"] == "threshold-hipa"
        assert parsed["replications"] == 2

    def test_json_fields(self, city_report):
        document = json.loads(emit(city_report, "json"))
        expected = set(MetricsReport.model_fields) - {"std"}
        expected |= {f"std_{name}" for name in REPORT_METRICS}
        assert set(document) == expected
        assert all(not isinstance(value, dict) for value in document.values())
        assert document["std_mean_latency_ms"] == city_report.std["mean_latency_ms"]
        assert parse_report_json(emit(city_report, "json")) == city_report

    def test_not_a_report_json(self):
        with pytest.raises(ValueError, match="not a report JSON"):
            parse_report_json("[1, 2]")

    def test_markdown_carries_csv_numbers(self, city_report):
        markdown = emit(city_report, "markdown")
        lines = markdown.splitlines()
        assert lines[0] == "### threshold-hipa on smart-city"
        assert "| Average Latency (ms) | " + repr(city_report.mean_latency_ms) in markdown
        for name in REPORT_METRICS:
            assert repr(city_report.value(name)) in markdown

    def test_comparison_csv(self):
        base = report("cloud-only", mean_latency_ms=10.0)
        rl = report("rl-hipa", mean_latency_ms=6.5, edge_share=40.0, cloud_share=60.0)
        lines = emit(compare([base, rl], "cloud-only"), "csv").splitlines()
        assert lines[0] == "metric,cloud-only,rl-hipa,rl-hipa vs cloud-only (%)"
        assert lines[1].startswith("mean_latency_ms,10.0,6.5,")
        assert any(line.startswith("edge_share,") and line.endswith(",n/a") for line in lines)

    def test_formats(self):
        assert normalize_format("markdown-table") == "markdown"
        assert normalize_format(" CSV ") == "csv"
        with pytest.raises(UnknownFormatError, match="xml"):
            normalize_format("xml")

    def test_rejects_other_documents(self):
        with pytest.raises(TypeError):
            emit({"policy": "x"}, "json")

    def test_not_a_report_csv(self):
        with pytest.raises(ValueError, match="not a report CSV"):
            parse_report_csv("a,b\n1,2\n")


class TestConsole:
    def test_render_report(self, city_report):
        console = Console(record=True, width=160)
        render_report(city_report, console)
        text = console.export_text()
        assert "threshold-hipa" in text
        assert "Average Latency (ms)" in text
        assert city_report.privacy_risk in text

    def test_render_comparison(self):
        console = Console(record=True, width=160)
        base = report("cloud-only", mean_latency_ms=10.0)
        rl = report("rl-hipa", mean_latency_ms=6.5)
        render_comparison(compare([base, rl], "cloud-only"), console)
        text = console.export_text()
        assert "+35.0%" in text
        assert "rl-hipa vs cloud-only" in text
