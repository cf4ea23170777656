"""Per-task orchestration pipeline shared by every policy."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from core.cost_model import analyze_task, argmax_toward_source, predicted_latency
from core.views import EncryptionParams, Layer, LayerSpecs, Task, ThresholdConfig, WeightConfig
from policy.rules import (
    DEFAULT_HIGH_COMPLEXITY,
    decide_cloud_only,
    decide_fog_centric,
    decide_greedy,
    decide_static,
    decide_threshold,
    reroute_on_overload,
)
from policy.views import Decision, PolicyKind, SystemState
from rl.views import Transition

if TYPE_CHECKING:
    from rl.agent import DQNAgent
    from sim.views import TraceEvent

logger = logging.getLogger(__name__)

DEFAULT_OVERLOAD_THRESHOLD = 0.9


class MissingAgentError(RuntimeError):
    pass


def parse_policy(name: str) -> PolicyKind:
    try:
        return PolicyKind(name.strip().lower())
    except ValueError:
        valid = ", ".join(kind.value for kind in PolicyKind)
        raise ValueError(f"Unknown policy '{name}'. Expected one of: {valid}") from None


@dataclass
class PolicyBinding:
    """A policy choice plus what it needs to run: the trained agent for rl-hipa."""

    kind: PolicyKind
    agent: DQNAgent | None = None
    online_learning: bool = False

    @property
    def name(self) -> str:
        return self.kind.value


class Orchestrator:
    def __init__(
        self,
        kind: PolicyKind,
        specs: LayerSpecs,
        *,
        weights: WeightConfig | None = None,
        thresholds: ThresholdConfig | None = None,
        encryption: EncryptionParams | None = None,
        overload_threshold: float = DEFAULT_OVERLOAD_THRESHOLD,
        fog_high_complexity: float = DEFAULT_HIGH_COMPLEXITY,
        agent: DQNAgent | None = None,
        enforce_local_privacy: bool = False,
        online_learning: bool = False,
    ):
        if kind is PolicyKind.RL and agent is None:
            raise MissingAgentError(
                f"policy '{kind.value}' needs a trained agent; signals missing training artifact (pass --agent)"
            )
        if not 0.0 < overload_threshold <= 1.0:
            raise ValueError(f"overload threshold must be in (0, 1], got {overload_threshold}")
        self.kind = kind
        self.specs = specs
        self.weights = weights or WeightConfig()
        self.thresholds = thresholds or ThresholdConfig()
        self.encryption = encryption or EncryptionParams()
        self.overload_threshold = overload_threshold
        self.fog_high_complexity = fog_high_complexity
        self.agent = agent
        self.enforce_local_privacy = enforce_local_privacy
        self.online_learning = online_learning and kind is PolicyKind.RL
        self._pending: dict[str, np.ndarray] = {}

    def decide(self, task: Task, state: SystemState) -> Decision:
        """Dispatch to the bound policy's rule."""
        match self.kind:
            case PolicyKind.THRESHOLD:
                return decide_threshold(task, self.thresholds, self.specs)
            case PolicyKind.GREEDY_UTILITY:
                return decide_greedy(task, self.specs, self.weights)
            case PolicyKind.CLOUD_ONLY:
                return decide_cloud_only(task, self.specs)
            case PolicyKind.STATIC:
                return decide_static(task, self.specs)
            case PolicyKind.FOG_CENTRIC:
                return decide_fog_centric(task, self.specs, self.fog_high_complexity)
            case PolicyKind.RL:
                return self._decide_rl(task, state)
        raise ValueError(f"unhandled policy {self.kind}")

    def _decide_rl(self, task: Task, state: SystemState) -> Decision:
        if self.agent is None:
            raise MissingAgentError("rl-hipa policy has no agent bound; signals missing training artifact")
        s = self.agent.encode(task, state)
        q = self.agent.q_values(s)
        layer = argmax_toward_source(q)
        if self.online_learning:
            self._pending[task.id] = s
        return Decision(
            task_id=task.id,
            layer=layer,
            predicted_latency=predicted_latency(task, self.specs.get(layer)),
            q_values=(float(q[0]), float(q[1]), float(q[2])),
            policy=PolicyKind.RL,
        )

    def orchestrate(self, task: Task, state: SystemState) -> Decision:
        """Analyze, assign, reroute around overload, then keep sensitive data off the cloud.

        The privacy pullback only lands on a fog layer within the overload threshold,
        so it never undoes a reroute; a pulled-back task keeps `rerouted` False and
        records the policy's cloud choice in `original_layer`.
        """
        features = analyze_task(task)
        decision = self.decide(task, state)

        routed = reroute_on_overload(decision, state, self.overload_threshold, task=task, specs=self.specs)
        if routed is not decision:
            logger.debug(
                "task %s rerouted %s -> %s (utilization %.3f)",
                task.id,
                decision.layer.label,
                routed.layer.label,
                state.utilization(decision.layer),
            )

        if (
            self.enforce_local_privacy
            and features.p == 1
            and routed.layer is Layer.CLOUD
            and state.utilization(Layer.FOG) <= self.overload_threshold
        ):
            logger.debug("task %s is sensitive; pulling it back from cloud to fog", task.id)
            routed = routed.model_copy(
                update={
                    "layer": Layer.FOG,
                    "original_layer": decision.layer,
                    "predicted_latency": predicted_latency(task, self.specs.fog),
                }
            )
        return routed

    def feedback(self, task: Task, event: TraceEvent) -> None:
        """Close the loop on a realized placement. Learns only with online learning on."""
        if not self.online_learning or self.agent is None:
            return
        s = self._pending.pop(task.id, None)
        if s is None or event.dropped or event.layer is None:
            return
        self.agent.observe(Transition(state=s, action=event.layer, reward=event.reward))
        self.agent.learn_step()
