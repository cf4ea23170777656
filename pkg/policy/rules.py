"""Placement rules. Each maps a task (and, for some, the layer triple) to a Decision."""

from __future__ import annotations

from core.cost_model import argmax_toward_source, predicted_latency, utility
from core.views import Layer, LayerSpecs, Task, ThresholdConfig, WeightConfig
from policy.views import Decision, PolicyKind, SystemState

# Latency bands of the static baseline, seconds.
STATIC_EDGE_BELOW = 0.010
STATIC_FOG_UP_TO = 0.100

DEFAULT_HIGH_COMPLEXITY = 1e8


def _decide(task: Task, layer: Layer, specs: LayerSpecs, policy: PolicyKind, **extra) -> Decision:
    return Decision(
        task_id=task.id,
        layer=layer,
        predicted_latency=predicted_latency(task, specs.get(layer)),
        policy=policy,
        **extra,
    )


def threshold_layer(task: Task, tc: ThresholdConfig) -> Layer:
    if task.latency_req < tc.low_latency:
        return Layer.EDGE
    if task.complexity < tc.moderate_complexity:
        return Layer.FOG
    return Layer.CLOUD


def decide_threshold(task: Task, tc: ThresholdConfig, specs: LayerSpecs) -> Decision:
    """Latency bound first, then complexity: edge, fog, else cloud."""
    return _decide(task, threshold_layer(task, tc), specs, PolicyKind.THRESHOLD)


def static_layer(task: Task) -> Layer:
    if task.latency_req < STATIC_EDGE_BELOW:
        return Layer.EDGE
    if task.latency_req <= STATIC_FOG_UP_TO:
        return Layer.FOG
    return Layer.CLOUD


def decide_static(task: Task, specs: LayerSpecs) -> Decision:
    return _decide(task, static_layer(task), specs, PolicyKind.STATIC)


def decide_fog_centric(task: Task, specs: LayerSpecs, high_complexity: float = DEFAULT_HIGH_COMPLEXITY) -> Decision:
    """Fog for everything except very heavy tasks; the edge is never used."""
    if high_complexity <= 0:
        raise ValueError(f"high_complexity must be > 0, got {high_complexity}")
    layer = Layer.CLOUD if task.complexity > high_complexity else Layer.FOG
    return _decide(task, layer, specs, PolicyKind.FOG_CENTRIC)


def decide_cloud_only(task: Task, specs: LayerSpecs) -> Decision:
    return _decide(task, Layer.CLOUD, specs, PolicyKind.CLOUD_ONLY)


def decide_greedy(task: Task, specs: LayerSpecs, w: WeightConfig) -> Decision:
    scores = [utility(task, spec, w) for spec in specs]
    layer = argmax_toward_source(scores)
    return _decide(task, layer, specs, PolicyKind.GREEDY_UTILITY, utility=scores[layer])


def reroute_on_overload(
    decision: Decision,
    state: SystemState,
    threshold: float,
    *,
    task: Task,
    specs: LayerSpecs,
) -> Decision:
    """Move an overloaded placement outward to the first layer at or under the threshold.

    Cloud is the sink and is returned whatever its utilization. Peer nodes inside
    a layer are handled by the simulator's dispatcher.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"overload threshold must be in (0, 1], got {threshold}")
    if state.utilization(decision.layer) <= threshold:
        return decision

    for layer in Layer:
        if layer <= decision.layer:
            continue
        if layer is Layer.CLOUD or state.utilization(layer) <= threshold:
            return decision.model_copy(
                update={
                    "layer": layer,
                    "rerouted": True,
                    "original_layer": decision.layer if decision.original_layer is None else decision.original_layer,
                    "predicted_latency": predicted_latency(task, specs.get(layer)),
                    "utility": None,
                }
            )
    return decision
