"""Scenario files: loading, dotted-key overrides and the bundled presets."""

from __future__ import annotations

import copy
import json
import logging
from pathlib import Path
from typing import Any, Mapping

from pydantic import ValidationError

from core.views import (
    EncryptionParams,
    Layer,
    LayerSpec,
    TaskCategory,
    ThresholdConfig,
    WeightConfig,
)
from sim.views import (
    Bands,
    CategoryProfile,
    LayerSetup,
    LayerSetups,
    NetworkRanges,
    ScenarioSpec,
    TaskMix,
)

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    pass


class UnknownGridKeyError(ScenarioError):
    pass


def _describe_validation(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        field = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"field '{field}': {err['msg']}")
    return "; ".join(parts)


def _set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    segments = key.split(".")
    node: Any = data
    for i, segment in enumerate(segments):
        if not isinstance(node, dict) or segment not in node:
            where = ".".join(segments[: i + 1])
            raise UnknownGridKeyError(f"unknown scenario key '{key}' (no field '{where}')")
        if i == len(segments) - 1:
            node[segment] = value
        else:
            node = node[segment]


def check_override_keys(spec: ScenarioSpec, keys: list[str]) -> None:
    """Reject keys that name no ScenarioSpec field, before anything runs."""
    template = spec.model_dump(mode="json")
    for key in keys:
        _set_dotted(copy.deepcopy(template), key, None)


def with_overrides(spec: ScenarioSpec, overrides: Mapping[str, Any]) -> ScenarioSpec:
    """Apply dotted-key overrides (e.g. 'task_count', 'layers.fog.pool_size') and revalidate."""
    if not overrides:
        return spec
    data = spec.model_dump(mode="json")
    for key, value in overrides.items():
        _set_dotted(data, key, value)
    try:
        return ScenarioSpec.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"invalid override {dict(overrides)}: {_describe_validation(e)}") from e


def load_scenario(path: str | Path, overrides: Mapping[str, Any] | None = None) -> ScenarioSpec:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be a JSON object, got {type(data).__name__}")
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"{path}: {_describe_validation(e)}") from e
    logger.debug("loaded scenario '%s' from %s", spec.name, path)
    return with_overrides(spec, overrides or {})


def smart_city_layers() -> LayerSetups:
    """Battery-powered devices, a small fog cluster and a large cloud pool."""
    return LayerSetups(
        edge=LayerSetup(
            spec=LayerSpec(
                layer=Layer.EDGE,
                proc_speed=1e8,
                capacity=1e8,
                p_proc=2.0,
                accuracy=0.85,
                fixed_overhead=0.005,
            ),
            queue_capacity=4,
            reliability_range=(0.9, 1.0),
        ),
        fog=LayerSetup(
            spec=LayerSpec(
                layer=Layer.FOG,
                proc_speed=2e9,
                capacity=1.6e10,
                p_proc=10.0,
                p_comm=2.0,
                accuracy=0.90,
                node_count=10,
                per_device_update_time=0.002,
                base_rtt=0.005,
                bandwidth=50.0,
            ),
            pool_size=8,
            queue_capacity=16,
            reliability_range=(0.9, 1.0),
        ),
        cloud=LayerSetup(
            spec=LayerSpec(
                layer=Layer.CLOUD,
                proc_speed=1e12,
                capacity=6.4e13,
                p_proc=100.0,
                p_comm=5.0,
                accuracy=0.95,
                fixed_overhead=0.0,
                base_rtt=0.05,
                bandwidth=50.0,
            ),
            pool_size=64,
            queue_capacity=64,
            reliability_range=(0.99, 1.0),
        ),
    )


def smart_city_scenario() -> ScenarioSpec:
    """1000 tasks an hour: half real-time, a third aggregation, the rest analytics."""
    return ScenarioSpec(
        name="smart-city",
        duration=3600.0,
        device_count=500,
        sensor_count=300,
        task_count=1000,
        task_mix=TaskMix(
            categories={
                TaskCategory.REALTIME: CategoryProfile(
                    share=0.5,
                    latency_mix=(0.9, 0.1, 0.0),
                    complexity_mix=(0.8, 0.2, 0.0),
                    privacy_probability=0.6,
                    data_size=(1.0, 20.0),
                ),
                TaskCategory.AGGREGATION: CategoryProfile(
                    share=0.35,
                    latency_mix=(0.1, 0.8, 0.1),
                    complexity_mix=(0.2, 0.7, 0.1),
                    privacy_probability=0.3,
                    data_size=(10.0, 100.0),
                ),
                TaskCategory.ANALYTICS: CategoryProfile(
                    share=0.15,
                    latency_mix=(0.0, 0.1, 0.9),
                    complexity_mix=(0.0, 0.2, 0.8),
                    privacy_probability=0.1,
                    data_size=(50.0, 100.0),
                ),
            },
            data_size_unit="KB",
        ),
        layers=smart_city_layers(),
        network=NetworkRanges(fog_rtt=(0.004, 0.006), cloud_rtt=(0.045, 0.055), bandwidth=(40.0, 60.0)),
        thresholds=ThresholdConfig(low_latency=0.010, moderate_complexity=1e8),
        # Capacity/complexity spans ten decades, hence the tiny capacity weight.
        weights=WeightConfig(utility=(0.7, 1e-12, 0.3), reward=(0.4, 0.3, 0.3), reward_privacy_bonus=0.3),
        encryption=EncryptionParams(alpha=0.01, beta=0.005),
        overload_threshold=0.9,
        fog_high_complexity=1e8,
        summarization_reduction=0.4,
        battery_capacity_j=18000.0,
        seed=0,
        replications=10,
    )


def low_load_scenario() -> ScenarioSpec:
    """500 tasks an hour from a sparse deployment of 100 devices."""
    return smart_city_scenario().model_copy(
        update={"name": "low-load", "device_count": 100, "sensor_count": 50, "task_count": 500}
    )


def high_load_scenario() -> ScenarioSpec:
    """5000 tasks an hour from a dense urban deployment of 2000 devices."""
    return smart_city_scenario().model_copy(
        update={"name": "high-load", "device_count": 2000, "sensor_count": 1000, "task_count": 5000}
    )


def separable_scenario() -> ScenarioSpec:
    """Three archetypes whose reward-optimal layers are edge, fog and cloud respectively."""
    return ScenarioSpec(
        name="separable",
        duration=3600.0,
        task_count=1000,
        task_mix=TaskMix(
            categories={
                TaskCategory.REALTIME: CategoryProfile(
                    share=0.4,
                    latency_mix=(1.0, 0.0, 0.0),
                    complexity_mix=(1.0, 0.0, 0.0),
                    privacy_probability=0.5,
                    data_size=(1.0, 5.0),
                ),
                TaskCategory.AGGREGATION: CategoryProfile(
                    share=0.3,
                    latency_mix=(0.0, 1.0, 0.0),
                    complexity_mix=(0.0, 1.0, 0.0),
                    privacy_probability=0.3,
                    data_size=(10.0, 50.0),
                ),
                TaskCategory.ANALYTICS: CategoryProfile(
                    share=0.3,
                    latency_mix=(0.0, 0.0, 1.0),
                    complexity_mix=(0.0, 0.0, 1.0),
                    privacy_probability=0.0,
                    data_size=(50.0, 100.0),
                ),
            },
            data_size_unit="KB",
        ),
        complexity_bands=Bands(low=(1e4, 1e5), moderate=(1e7, 2e7), high=(5e9, 1e10)),
        layers=smart_city_layers(),
        seed=0,
        replications=1,
    )


def write_scenario(spec: ScenarioSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(spec.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")
    return path
