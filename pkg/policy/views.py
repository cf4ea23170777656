from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.views import Layer


class PolicyKind(str, Enum):
    """Orchestration policies; values are the names accepted on the command line."""

    RL = "rl-hipa"
    THRESHOLD = "threshold-hipa"
    GREEDY_UTILITY = "greedy-utility"
    CLOUD_ONLY = "cloud-only"
    STATIC = "static"
    FOG_CENTRIC = "fog-centric"


class SystemState(BaseModel):
    """Snapshot the orchestrator observes before each decision."""

    model_config = ConfigDict(frozen=True)

    queue_utilization: tuple[float, float, float] = (0.0, 0.0, 0.0)
    network_rtt: tuple[float, float, float] = (0.0, 0.0, 0.0)
    battery: tuple[float, ...] = ()

    @field_validator("queue_utilization", "battery")
    @classmethod
    def _unit_interval(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        for v in values:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"value {v} outside [0, 1]")
        return values

    @field_validator("network_rtt")
    @classmethod
    def _non_negative(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if any(v < 0.0 for v in values):
            raise ValueError(f"network RTTs must be >= 0, got {values}")
        return values

    def utilization(self, layer: Layer) -> float:
        return self.queue_utilization[layer]


class Decision(BaseModel):
    """A placement and the figures the policy used to make it."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    layer: Layer
    rerouted: bool = False
    original_layer: Layer | None = None
    predicted_latency: float = Field(gt=0.0)
    utility: float | None = None
    q_values: tuple[float, float, float] | None = None
    policy: PolicyKind | None = None
