from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

SHARE_TOLERANCE = 1e-9

# Scalar metrics in report order (the benchmark table rows first), with display labels.
METRIC_LABELS: dict[str, str] = {
    "mean_latency_ms": "Average Latency (ms)",
    "bandwidth_gb_per_hour": "Bandwidth Usage (GB/hour)",
    "energy_kwh": "Energy Consumption (kWh)",
    "mean_processing_time_s": "Task Processing Time (s)",
    "median_latency_ms": "Median Latency (ms)",
    "p95_latency_ms": "P95 Latency (ms)",
    "edge_mean_latency_ms": "Edge Latency (ms)",
    "fog_mean_latency_ms": "Fog Latency (ms)",
    "cloud_mean_latency_ms": "Cloud Latency (ms)",
    "edge_mean_processing_ms": "Edge Processing Time (ms)",
    "fog_mean_processing_ms": "Fog Processing Time (ms)",
    "cloud_mean_processing_ms": "Cloud Processing Time (ms)",
    "edge_share": "Edge Share (%)",
    "fog_share": "Fog Share (%)",
    "cloud_share": "Cloud Share (%)",
    "sensitive_local_fraction": "Sensitive Data Kept Local (%)",
    "mean_encryption_overhead_ms": "Encryption Overhead (ms)",
    "reroute_rate": "Reroute Rate (%)",
    "mean_reward": "Mean Reward",
    "mean_accuracy": "Mean Accuracy",
    "deadline_miss_rate": "Deadline Miss Rate (%)",
    "drop_rate": "Drop Rate (%)",
}
REPORT_METRICS = tuple(METRIC_LABELS)

PERCENT_METRICS = (
    "edge_share",
    "fog_share",
    "cloud_share",
    "sensitive_local_fraction",
    "reroute_rate",
    "deadline_miss_rate",
    "drop_rate",
)

# Rows of a policy comparison.
COMPARISON_METRICS = (
    "mean_latency_ms",
    "bandwidth_gb_per_hour",
    "energy_kwh",
    "mean_processing_time_s",
    "edge_share",
    "sensitive_local_fraction",
    "reroute_rate",
)

PrivacyRisk = Literal["Low", "Medium", "High"]


def privacy_risk_label(sensitive_local_fraction: float) -> PrivacyRisk:
    if sensitive_local_fraction >= 50.0:
        return "Low"
    if sensitive_local_fraction >= 20.0:
        return "Medium"
    return "High"


class MetricsReport(BaseModel):
    """Replication-averaged metrics of one policy on one scenario; std holds the spread of each scalar."""

    model_config = ConfigDict(frozen=True)

    policy: str
    scenario: str = ""
    duration_s: float = Field(gt=0.0)
    replications: int = Field(ge=1)
    tasks_per_replication: float = Field(ge=0.0)

    mean_latency_ms: float = Field(ge=0.0)
    bandwidth_gb_per_hour: float = Field(ge=0.0)
    energy_kwh: float = Field(ge=0.0)
    mean_processing_time_s: float = Field(ge=0.0)
    median_latency_ms: float = Field(ge=0.0)
    p95_latency_ms: float = Field(ge=0.0)
    # per-layer means over the tasks each layer served; 0 when a layer served none
    edge_mean_latency_ms: float = Field(ge=0.0)
    fog_mean_latency_ms: float = Field(ge=0.0)
    cloud_mean_latency_ms: float = Field(ge=0.0)
    edge_mean_processing_ms: float = Field(ge=0.0)
    fog_mean_processing_ms: float = Field(ge=0.0)
    cloud_mean_processing_ms: float = Field(ge=0.0)
    edge_share: float
    fog_share: float
    cloud_share: float
    sensitive_local_fraction: float
    mean_encryption_overhead_ms: float = Field(ge=0.0)
    reroute_rate: float
    mean_reward: float
    mean_accuracy: float = Field(ge=0.0, le=1.0)
    deadline_miss_rate: float
    drop_rate: float
    privacy_risk: PrivacyRisk
    std: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_percentages(self) -> MetricsReport:
        for name in PERCENT_METRICS:
            value = getattr(self, name)
            if not -SHARE_TOLERANCE <= value <= 100.0 + SHARE_TOLERANCE:
                raise ValueError(f"{name} must be a percentage in [0, 100], got {value}")
        total = self.edge_share + self.fog_share + self.cloud_share
        if total and abs(total - 100.0) > SHARE_TOLERANCE:
            raise ValueError(f"layer shares must sum to 100%, got {total!r}")
        return self

    def value(self, metric: str) -> float:
        if metric not in METRIC_LABELS:
            raise KeyError(f"unknown metric '{metric}'")
        return getattr(self, metric)


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    label: str
    values: dict[str, float]
    # (baseline - candidate) / baseline in percent; None when the baseline is 0 and the candidate is not.
    deltas: dict[str, float | None]


class Comparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    baseline: str
    policies: list[str]
    rows: list[ComparisonRow]

    def row(self, metric: str) -> ComparisonRow:
        for row in self.rows:
            if row.metric == metric:
                return row
        raise KeyError(f"metric '{metric}' not in comparison")
