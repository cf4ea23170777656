"""Closed-form cost model of the three-layer system.

Every function here is pure: same inputs, same float out. Times are seconds,
sizes megabytes, bandwidth megabits per second, energy joules.
"""

from __future__ import annotations

import math
from typing import Sequence

from core.views import (
    EncryptionParams,
    FeatureVector,
    Layer,
    LayerSpec,
    LayerSpecs,
    Task,
    WeightConfig,
)

DEFAULT_TINYML_INFERENCE = 0.01
BITS_PER_BYTE = 8.0

PRIVACY_SCORES = {Layer.EDGE: 1.0, Layer.FOG: 0.5, Layer.CLOUD: 0.0}


class MalformedNodeSetError(ValueError):
    pass


class PowerModelError(ValueError):
    pass


def analyze_task(task: Task) -> FeatureVector:
    return FeatureVector(l=task.latency_req, c=task.complexity, p=task.privacy)


def agg_time_fedlearn(spec: LayerSpec) -> float:
    """Federated aggregation time: one model update per participating device."""
    return spec.node_count * spec.per_device_update_time


def layer_overhead(spec: LayerSpec) -> float:
    if spec.fixed_overhead is not None:
        return spec.fixed_overhead
    if spec.layer is Layer.EDGE:
        return DEFAULT_TINYML_INFERENCE
    if spec.layer is Layer.FOG:
        return agg_time_fedlearn(spec)
    return 0.0


def layer_accuracy(spec: LayerSpec) -> float:
    return spec.accuracy


def proc_time(task: Task, spec: LayerSpec) -> float:
    # Network time is never part of this; comm_time owns it.
    return task.complexity / spec.proc_speed + layer_overhead(spec)


def comm_time(task: Task, spec: LayerSpec) -> float:
    if spec.layer is Layer.EDGE:
        return 0.0
    return spec.base_rtt + task.data_size * BITS_PER_BYTE / spec.bandwidth


def predicted_latency(task: Task, spec: LayerSpec) -> float:
    return proc_time(task, spec) + comm_time(task, spec)


def privacy_score(task: Task, layer: Layer) -> float:
    if task.privacy == 0:
        return 0.0
    return PRIVACY_SCORES[layer]


def utility(task: Task, spec: LayerSpec, w: WeightConfig) -> float:
    w_l, w_c, w_p = w.utility
    return (
        w_l / predicted_latency(task, spec)
        + w_c * spec.capacity / task.complexity
        + w_p * privacy_score(task, spec.layer)
    )


def argmax_toward_source(values: Sequence[float]) -> Layer:
    """Index of the largest value; ties go to the layer nearest the data source."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return Layer(best)


def select_layer(task: Task, specs: LayerSpecs, w: WeightConfig) -> Layer:
    return argmax_toward_source([utility(task, spec, w) for spec in specs])


def enc_time(task: Task, ep: EncryptionParams) -> float:
    if task.privacy == 0:
        return 0.0
    return ep.alpha * task.data_size + ep.beta


def total_time(task: Task, spec: LayerSpec, ep: EncryptionParams) -> float:
    return predicted_latency(task, spec) + enc_time(task, ep)


def energy(task: Task, spec: LayerSpec) -> float:
    return spec.p_proc * proc_time(task, spec) + spec.p_comm * comm_time(task, spec)


def check_power_model(specs: LayerSpecs) -> None:
    """Reject specs whose energy can be zero; the reward divides by it."""
    for spec in specs:
        if spec.p_proc <= 0.0:
            raise PowerModelError(
                f"{spec.layer.label}: p_proc must be > 0 for reward evaluation "
                "(zero processing power signals a misconfigured power model)"
            )


def reward(task: Task, spec: LayerSpec, w: WeightConfig, ep: EncryptionParams) -> float:
    latency = total_time(task, spec, ep)
    joules = energy(task, spec)
    if joules <= 0.0:
        raise PowerModelError(
            f"{spec.layer.label}: energy is {joules} J for task {task.id}; misconfigured power model"
        )
    w1, w2, w3 = w.reward
    value = w1 / latency + w2 / joules + w3 * layer_accuracy(spec)
    if w.reward_privacy_bonus:
        value += w.reward_privacy_bonus * privacy_score(task, spec.layer)
    return value


def reliability_weights(reliabilities: Sequence[float]) -> list[float]:
    if not reliabilities:
        raise MalformedNodeSetError("empty node set: at least one reliability is required")
    if any(not (r > 0.0) or not math.isfinite(r) for r in reliabilities):
        raise MalformedNodeSetError(f"reliabilities must be positive and finite, got {list(reliabilities)}")
    total = math.fsum(reliabilities)
    return [r / total for r in reliabilities]


def aggregate_results(values: Sequence[float], reliabilities: Sequence[float]) -> float:
    """Reliability-weighted combination of per-node results."""
    if len(values) != len(reliabilities):
        raise MalformedNodeSetError(
            f"{len(values)} values but {len(reliabilities)} reliabilities; lists must have equal length"
        )
    weights = reliability_weights(reliabilities)
    return math.fsum(wt * v for wt, v in zip(weights, values))


def default_layer_specs() -> LayerSpecs:
    """Reference hardware: 0.1/10/100 W compute, 5 ms fog and 50 ms cloud RTT."""
    return LayerSpecs(
        edge=LayerSpec(
            layer=Layer.EDGE,
            proc_speed=1e8,
            capacity=1e8,
            p_proc=0.1,
            p_comm=0.0,
            accuracy=0.85,
            fixed_overhead=DEFAULT_TINYML_INFERENCE,
        ),
        fog=LayerSpec(
            layer=Layer.FOG,
            proc_speed=1e10,
            capacity=1e11,
            p_proc=10.0,
            p_comm=2.0,
            accuracy=0.90,
            node_count=10,
            per_device_update_time=0.002,
            base_rtt=0.005,
            bandwidth=80.0,
        ),
        cloud=LayerSpec(
            layer=Layer.CLOUD,
            proc_speed=1e11,
            capacity=1e13,
            p_proc=100.0,
            p_comm=5.0,
            accuracy=0.95,
            fixed_overhead=0.0,
            base_rtt=0.05,
            bandwidth=80.0,
        ),
    )
