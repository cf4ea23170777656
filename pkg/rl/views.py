from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.views import Layer

# Slot order of the state encoding.
STATE_FIELDS = (
    "latency_req",
    "complexity",
    "privacy",
    "data_size",
    "edge_utilization",
    "fog_utilization",
    "cloud_utilization",
)
STATE_DIM = len(STATE_FIELDS)
ACTION_COUNT = len(Layer)


class NormalizationBounds(BaseModel):
    """Raw ranges mapped onto [0, 1]; latency and complexity on a log scale."""

    model_config = ConfigDict(frozen=True)

    latency: tuple[float, float] = (0.001, 1.0)
    complexity: tuple[float, float] = (1e4, 1e10)
    data_size: tuple[float, float] = (0.001, 0.1)

    @model_validator(mode="after")
    def _check_ranges(self) -> NormalizationBounds:
        for name in ("latency", "complexity", "data_size"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
                raise ValueError(f"{name} bounds must be finite with hi > lo, got ({lo}, {hi})")
        for name in ("latency", "complexity"):
            if getattr(self, name)[0] <= 0:
                raise ValueError(f"{name} lower bound must be > 0 for log scaling")
        return self


class AgentConfig(BaseModel):
    """DQN hyperparameters. Loaded from config/agent_config.yaml by the CLI."""

    model_config = ConfigDict(frozen=True)

    episodes: int = Field(default=1000, ge=1)
    tasks_per_episode: int = Field(default=50, ge=1)
    epsilon_start: float = Field(default=1.0, ge=0.0, le=1.0)
    epsilon_end: float = Field(default=0.05, ge=0.0, le=1.0)
    epsilon_decay_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    # 0 is accepted and freezes the network.
    learning_rate: float = Field(default=1e-3, ge=0.0)
    batch_size: int = Field(default=64, ge=1)
    replay_capacity: int = Field(default=10_000, ge=1)
    discount: float = Field(default=0.0, ge=0.0, lt=1.0)
    hidden_sizes: tuple[int, ...] = (32, 32)
    optimizer: Literal["adam", "sgd"] = "adam"
    use_target_network: bool = False
    target_sync_every: int = Field(default=500, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_consistency(self) -> AgentConfig:
        if self.replay_capacity < self.batch_size:
            raise ValueError(
                f"replay_capacity ({self.replay_capacity}) must be >= batch_size ({self.batch_size})"
            )
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden layer sizes must be positive, got {self.hidden_sizes}")
        return self

    @property
    def dims(self) -> tuple[int, ...]:
        return (STATE_DIM, *self.hidden_sizes, ACTION_COUNT)


@dataclass
class Transition:
    state: np.ndarray
    action: Layer
    reward: float
    terminal: bool = True
    next_state: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.reward):
            raise ValueError(f"transition reward must be finite, got {self.reward}")
        if self.state.shape != (STATE_DIM,):
            raise ValueError(f"state must have shape ({STATE_DIM},), got {self.state.shape}")
