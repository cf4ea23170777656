from __future__ import annotations

from enum import Enum, IntEnum
from typing import Iterator, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

WEIGHT_SUM_TOLERANCE = 1e-9


class Layer(IntEnum):
    """Processing layer. The integer order is the distance from the data source."""

    EDGE = 0
    FOG = 1
    CLOUD = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> Layer:
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown layer '{label}'. Expected one of: edge, fog, cloud") from None


class TaskCategory(str, Enum):
    REALTIME = "realtime"
    AGGREGATION = "aggregation"
    ANALYTICS = "analytics"


class Task(BaseModel):
    """One unit of IoT work as seen by the orchestrator."""

    model_config = ConfigDict(frozen=True)

    id: str
    arrival_time: float = Field(default=0.0, ge=0.0)
    latency_req: float = Field(gt=0.0, description="Maximum acceptable latency, seconds")
    complexity: float = Field(gt=0.0, description="Floating-point operation count")
    data_size: float = Field(gt=0.0, description="Payload size, megabytes")
    privacy: Literal[0, 1] = 0
    category: TaskCategory = TaskCategory.REALTIME


class FeatureVector(BaseModel):
    """What the orchestrator reads off a task: latency bound, complexity, privacy flag."""

    model_config = ConfigDict(frozen=True)

    l: float
    c: float
    p: Literal[0, 1]


class LayerSpec(BaseModel):
    """Physical model of one layer: compute, power, accuracy and link parameters."""

    model_config = ConfigDict(frozen=True)

    layer: Layer
    proc_speed: float = Field(gt=0.0, description="Per-node processing speed, FLOPs/second")
    capacity: float = Field(gt=0.0, description="Aggregate layer capacity, FLOPs/second")
    p_proc: float = Field(default=0.0, ge=0.0, description="Processing power draw, watts")
    p_comm: float = Field(default=0.0, ge=0.0, description="Communication power draw, watts")
    accuracy: float = Field(default=0.9, ge=0.0, le=1.0)
    fixed_overhead: float | None = Field(
        default=None,
        ge=0.0,
        description="Model inference time (edge), federated aggregation time (fog), 0 (cloud); derived when unset",
    )
    node_count: int = Field(default=1, ge=1)
    per_device_update_time: float = Field(default=0.0, ge=0.0)
    base_rtt: float = Field(default=0.0, ge=0.0)
    bandwidth: float = Field(default=100.0, gt=0.0, description="Link rate toward this layer, Mbit/s")
    reliability: float = Field(default=1.0, gt=0.0)

    @field_validator("layer", mode="before")
    @classmethod
    def _layer_from_label(cls, value: object) -> object:
        if isinstance(value, str):
            return Layer.from_label(value)
        return value

    @model_validator(mode="after")
    def _check_layer_invariants(self) -> LayerSpec:
        if self.capacity < self.proc_speed:
            raise ValueError(f"{self.layer.label}: capacity ({self.capacity}) must be >= proc_speed ({self.proc_speed})")
        if self.layer is Layer.EDGE and self.base_rtt != 0.0:
            raise ValueError("edge: base_rtt must be 0 (no network hop)")
        return self


class LayerSpecs(BaseModel):
    """The Edge/Fog/Cloud triple, iterated in source order."""

    model_config = ConfigDict(frozen=True)

    edge: LayerSpec
    fog: LayerSpec
    cloud: LayerSpec

    @model_validator(mode="after")
    def _check_slots(self) -> LayerSpecs:
        for layer in Layer:
            if self.get(layer).layer is not layer:
                raise ValueError(f"LayerSpec in slot '{layer.label}' declares layer '{self.get(layer).layer.label}'")
        return self

    def get(self, layer: Layer) -> LayerSpec:
        return getattr(self, layer.label)

    def __iter__(self) -> Iterator[LayerSpec]:  # type: ignore[override]
        return iter((self.edge, self.fog, self.cloud))


class WeightConfig(BaseModel):
    """Weights of the placement utility and of the RL reward."""

    model_config = ConfigDict(frozen=True)

    # capacity/complexity spans many decades; scenarios give it a tiny weight to keep terms comparable.
    utility: tuple[float, float, float] = (0.7, 0.0, 0.3)
    reward: tuple[float, float, float] = (0.4, 0.3, 0.3)
    # Additive privacy term on the reward; 0 gives the plain latency/energy/accuracy reward.
    reward_privacy_bonus: float = Field(default=0.3, ge=0.0)

    @model_validator(mode="after")
    def _check_weights(self) -> WeightConfig:
        for name, weights in (("utility", self.utility), ("reward", self.reward)):
            if any(w < 0 for w in weights):
                raise ValueError(f"{name} weights must be non-negative, got {weights}")
            if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOLERANCE:
                raise ValueError(f"{name} weights must sum to 1, got {sum(weights)!r}")
        return self


class EncryptionParams(BaseModel):
    """Encryption cost: alpha seconds per MB plus beta seconds of setup."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.01, ge=0.0)
    beta: float = Field(default=0.005, ge=0.0)


class ThresholdConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    low_latency: float = Field(default=0.1, gt=0.0, description="Below this latency bound a task stays on the edge, seconds")
    moderate_complexity: float = Field(default=1e6, gt=0.0, description="Below this complexity a task fits the fog, FLOPs")
