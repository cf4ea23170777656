from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterator, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.views import (
    WEIGHT_SUM_TOLERANCE,
    EncryptionParams,
    Layer,
    LayerSpec,
    LayerSpecs,
    TaskCategory,
    ThresholdConfig,
    WeightConfig,
)

Range = tuple[float, float]

DATA_UNIT_MB = {"KB": 1e-3, "MB": 1.0}


def _check_range(name: str, bounds: Range, positive: bool = True) -> Range:
    lo, hi = bounds
    if hi < lo:
        raise ValueError(f"{name}: upper bound {hi} is below lower bound {lo}")
    if positive and lo <= 0:
        raise ValueError(f"{name}: lower bound must be > 0, got {lo}")
    return bounds


def _check_mix(name: str, mix: tuple[float, ...]) -> None:
    if any(p < 0 for p in mix):
        raise ValueError(f"{name}: proportions must be non-negative, got {mix}")
    if abs(sum(mix) - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise ValueError(f"{name}: proportions must sum to 1, got {sum(mix)!r}")


class Bands(BaseModel):
    """Low / moderate / high ranges of one task attribute."""

    model_config = ConfigDict(frozen=True)

    low: Range
    moderate: Range
    high: Range

    @model_validator(mode="after")
    def _check_bands(self) -> Bands:
        for name in ("low", "moderate", "high"):
            _check_range(name, getattr(self, name))
        return self

    def __getitem__(self, index: int) -> Range:
        return (self.low, self.moderate, self.high)[index]

    @property
    def span(self) -> Range:
        return (min(self.low[0], self.moderate[0], self.high[0]), max(self.low[1], self.moderate[1], self.high[1]))


def default_latency_bands() -> Bands:
    return Bands(low=(0.001, 0.010), moderate=(0.010, 0.100), high=(0.100, 1.0))


def default_complexity_bands() -> Bands:
    return Bands(low=(1e4, 1e6), moderate=(1e6, 1e8), high=(1e8, 1e10))


class CategoryProfile(BaseModel):
    """How tasks of one category are drawn."""

    model_config = ConfigDict(frozen=True)

    share: float = Field(ge=0.0, le=1.0)
    latency_mix: tuple[float, float, float]
    complexity_mix: tuple[float, float, float]
    privacy_probability: float = Field(default=0.0, ge=0.0, le=1.0)
    data_size: Range = (1.0, 100.0)

    @model_validator(mode="after")
    def _check_profile(self) -> CategoryProfile:
        _check_mix("latency_mix", self.latency_mix)
        _check_mix("complexity_mix", self.complexity_mix)
        _check_range("data_size", self.data_size)
        return self


class TaskMix(BaseModel):
    model_config = ConfigDict(frozen=True)

    categories: dict[TaskCategory, CategoryProfile]
    data_size_unit: Literal["KB", "MB"] = "KB"

    @model_validator(mode="after")
    def _check_shares(self) -> TaskMix:
        if not self.categories:
            raise ValueError("task mix needs at least one category")
        _check_mix("category shares", tuple(p.share for p in self.categories.values()))
        return self

    def data_size_mb(self) -> Range:
        """Smallest and largest payload any category can produce, in MB."""
        scale = DATA_UNIT_MB[self.data_size_unit]
        return (
            min(p.data_size[0] for p in self.categories.values()) * scale,
            max(p.data_size[1] for p in self.categories.values()) * scale,
        )


class LayerSetup(BaseModel):
    """One layer's physical model plus its node pool."""

    model_config = ConfigDict(frozen=True)

    spec: LayerSpec
    # None means one node per device on the edge and a single node elsewhere.
    pool_size: int | None = Field(default=None, ge=1)
    queue_capacity: int = Field(default=16, ge=1, description="Tasks a node holds, in service or waiting")
    # None gives every node the spec's own reliability.
    reliability_range: Range | None = None

    @field_validator("reliability_range")
    @classmethod
    def _positive_reliability(cls, bounds: Range | None) -> Range | None:
        if bounds is None:
            return None
        return _check_range("reliability_range", bounds)


class LayerSetups(BaseModel):
    model_config = ConfigDict(frozen=True)

    edge: LayerSetup
    fog: LayerSetup
    cloud: LayerSetup

    def get(self, layer: Layer) -> LayerSetup:
        return getattr(self, layer.label)

    def __iter__(self) -> Iterator[LayerSetup]:  # type: ignore[override]
        return iter((self.edge, self.fog, self.cloud))

    def specs(self) -> LayerSpecs:
        return LayerSpecs(edge=self.edge.spec, fog=self.fog.spec, cloud=self.cloud.spec)


class NetworkRanges(BaseModel):
    """Per-run link parameters, each drawn uniformly from its range."""

    model_config = ConfigDict(frozen=True)

    fog_rtt: Range = (0.005, 0.005)
    cloud_rtt: Range = (0.05, 0.05)
    bandwidth: Range = (10.0, 100.0)

    @model_validator(mode="after")
    def _check_network(self) -> NetworkRanges:
        _check_range("fog_rtt", self.fog_rtt, positive=False)
        _check_range("cloud_rtt", self.cloud_rtt, positive=False)
        _check_range("bandwidth", self.bandwidth)
        return self


class ScenarioSpec(BaseModel):
    """Everything one simulation needs; scenario JSON files map onto these fields."""

    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    duration: float = Field(default=3600.0, gt=0.0, description="Virtual seconds")
    device_count: int = Field(default=500, ge=1)
    sensor_count: int = Field(default=300, ge=0)
    task_count: int = Field(default=1000, ge=1)
    task_mix: TaskMix
    latency_bands: Bands = Field(default_factory=default_latency_bands)
    complexity_bands: Bands = Field(default_factory=default_complexity_bands)
    layers: LayerSetups
    network: NetworkRanges | None = None
    thresholds: ThresholdConfig = Field(default_factory=ThresholdConfig)
    weights: WeightConfig = Field(default_factory=WeightConfig)
    encryption: EncryptionParams = Field(default_factory=EncryptionParams)
    overload_threshold: float = Field(default=0.9, gt=0.0, le=1.0)
    fog_high_complexity: float = Field(default=1e8, gt=0.0)
    summarization_reduction: float = Field(
        default=0.4, ge=0.0, lt=1.0, description="Fraction of an aggregation task's payload the fog strips before the cloud hop"
    )
    battery_capacity_j: float = Field(default=0.0, ge=0.0, description="Per edge device; 0 disables the battery model")
    allow_drops: bool = False
    enforce_local_privacy: bool = False
    seed: int = 0
    replications: int = Field(default=10, ge=1)

    def data_size_scale(self) -> float:
        return DATA_UNIT_MB[self.task_mix.data_size_unit]

    def pool_size(self, layer: Layer) -> int:
        setup = self.layers.get(layer)
        if setup.pool_size is not None:
            return setup.pool_size
        return self.device_count if layer is Layer.EDGE else 1


class TraceEvent(BaseModel):
    """Realized outcome of one task. Dropped tasks carry layer=None and zero costs."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    arrival_time: float
    category: TaskCategory
    privacy: Literal[0, 1]
    latency_req: float
    complexity: float
    data_size: float
    layer: Layer | None
    original_layer: Layer | None = None
    rerouted: bool = False
    dropped: bool = False
    node_index: int = -1
    queue_wait: float = 0.0
    proc_time: float = 0.0
    comm_time: float = 0.0
    enc_time: float = 0.0
    total_latency: float = 0.0
    energy: float = 0.0
    reward: float = 0.0
    accuracy: float = 0.0
    bytes_edge_fog: float = 0.0
    bytes_fog_cloud: float = 0.0
    deadline_met: bool = False

    @property
    def bytes_transferred(self) -> float:
        return self.bytes_edge_fog + self.bytes_fog_cloud


@dataclass
class Node:
    """One server: single FIFO queue, one task in service at a time."""

    index: int
    reliability: float
    queue_capacity: int
    # result quality this node delivers; below-unit reliability degrades it
    accuracy: float = 1.0
    busy_until: float = 0.0
    occupied: int = 0
    battery_j: float = 0.0
    battery_capacity_j: float = 0.0

    @property
    def battery_fraction(self) -> float:
        if self.battery_capacity_j <= 0.0:
            return 1.0
        return max(0.0, min(1.0, self.battery_j / self.battery_capacity_j))


@dataclass
class NodePool:
    layer: Layer
    spec: LayerSpec
    nodes: list[Node]
    cursor: int = 0
    occupied: int = 0
    # (finish_time, sequence, node_index) of tasks still in the pool
    departures: list[tuple[float, int, int]] = field(default_factory=list)
    slots: int = 0
    _sequence: int = 0

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError(f"{self.layer.label}: node pool must have at least one node")
        self.slots = sum(node.queue_capacity for node in self.nodes)

    @property
    def utilization(self) -> float:
        return min(1.0, max(0.0, self.occupied / self.slots))

    @property
    def reliabilities(self) -> list[float]:
        return [node.reliability for node in self.nodes]

    @property
    def accuracies(self) -> list[float]:
        return [node.accuracy for node in self.nodes]

    def release_until(self, now: float) -> None:
        """Free the slots of every task finished by `now`."""
        while self.departures and self.departures[0][0] <= now:
            _, _, index = heapq.heappop(self.departures)
            self.nodes[index].occupied -= 1
            self.occupied -= 1

    def admit(self, node: Node, finish_time: float) -> None:
        node.occupied += 1
        self.occupied += 1
        heapq.heappush(self.departures, (finish_time, self._sequence, node.index))
        self._sequence += 1
