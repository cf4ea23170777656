# engine.py – discrete-event execution of placement decisions over FIFO node pools

from __future__ import annotations

import asyncio
import logging
from typing import Mapping

import numpy as np

from core.cost_model import (
    aggregate_results,
    check_power_model,
    comm_time,
    enc_time,
    energy,
    predicted_latency,
    proc_time,
    reward,
)
from core.views import Layer, LayerSpecs, Task, TaskCategory
from policy.orchestrator import Orchestrator, PolicyBinding
from policy.views import Decision, SystemState
from rl.views import NormalizationBounds
from sim.topology import build_topology, route
from sim.views import Node, NodePool, ScenarioSpec, TraceEvent
from sim.workload import generate_workload

logger = logging.getLogger(__name__)


def realize_layer_specs(scenario: ScenarioSpec, rng: np.random.Generator) -> LayerSpecs:
    """Layer specs for one run; link parameters are drawn when the scenario gives ranges."""
    specs = scenario.layers.specs()
    net = scenario.network
    if net is None:
        return specs
    fog_rtt = float(rng.uniform(*net.fog_rtt))
    cloud_rtt = float(rng.uniform(*net.cloud_rtt))
    fog_bw = float(rng.uniform(*net.bandwidth))
    cloud_bw = float(rng.uniform(*net.bandwidth))
    return LayerSpecs(
        edge=specs.edge,
        fog=specs.fog.model_copy(update={"base_rtt": fog_rtt, "bandwidth": fog_bw}),
        cloud=specs.cloud.model_copy(update={"base_rtt": cloud_rtt, "bandwidth": cloud_bw}),
    )


def node_accuracy(layer_accuracy: float, reliability: float) -> float:
    """Accuracy one node delivers: the layer's model accuracy, scaled down by reliability below 1."""
    return layer_accuracy * min(1.0, reliability)


def build_system_state(pools: Mapping[Layer, NodePool], now: float) -> SystemState:
    """Observe the pools at `now`: occupied slots over total slots per layer."""
    for pool in pools.values():
        pool.release_until(now)
    edge_nodes = pools[Layer.EDGE].nodes
    battery: tuple[float, ...] = ()
    if any(node.battery_capacity_j > 0.0 for node in edge_nodes):
        battery = tuple(node.battery_fraction for node in edge_nodes)
    return SystemState(
        queue_utilization=tuple(pools[layer].utilization for layer in Layer),
        network_rtt=tuple(pools[layer].spec.base_rtt for layer in Layer),
        battery=battery,
    )


def normalization_bounds(scenario: ScenarioSpec) -> NormalizationBounds:
    """Encoding ranges taken from the scenario's declared generation ranges."""
    lo, hi = scenario.task_mix.data_size_mb()
    if hi <= lo:
        hi = lo * 2.0
    return NormalizationBounds(
        latency=scenario.latency_bands.span,
        complexity=scenario.complexity_bands.span,
        data_size=(lo, hi),
    )


class Simulator:
    """Node pools of one run plus the step interface (advance, snapshot, submit)."""

    def __init__(self, scenario: ScenarioSpec, rng: np.random.Generator):
        self.scenario = scenario
        self.specs = realize_layer_specs(scenario, rng)
        check_power_model(self.specs)
        self.topology = build_topology(self.specs)
        self.routes = {layer: route(self.topology, layer) for layer in Layer}
        self.pools = {layer: self._build_pool(layer, rng) for layer in Layer}
        self.now = 0.0

    def _build_pool(self, layer: Layer, rng: np.random.Generator) -> NodePool:
        setup = self.scenario.layers.get(layer)
        spec = self.specs.get(layer)
        size = self.scenario.pool_size(layer)
        if setup.reliability_range is None:
            reliabilities = np.full(size, spec.reliability)
        else:
            reliabilities = rng.uniform(*setup.reliability_range, size=size)
        battery = self.scenario.battery_capacity_j if layer is Layer.EDGE else 0.0
        nodes = [
            Node(
                index=i,
                reliability=float(r),
                queue_capacity=setup.queue_capacity,
                accuracy=node_accuracy(spec.accuracy, float(r)),
                battery_j=battery,
                battery_capacity_j=battery,
            )
            for i, r in enumerate(reliabilities)
        ]
        return NodePool(layer=layer, spec=spec, nodes=nodes)

    def advance(self, now: float) -> None:
        if now < self.now:
            raise ValueError(f"time cannot go backwards ({now} < {self.now})")
        self.now = now
        for pool in self.pools.values():
            pool.release_until(now)

    def snapshot(self) -> SystemState:
        return build_system_state(self.pools, self.now)

    @staticmethod
    def _pick_node(pool: NodePool) -> Node | None:
        """Least-loaded node with a free slot; ties go round-robin from the pool cursor."""
        size = len(pool.nodes)
        first = pool.nodes[pool.cursor]
        if first.occupied == 0:
            chosen: Node | None = first
        else:
            chosen = None
            best_key: tuple[int, int] | None = None
            for node in pool.nodes:
                if node.occupied >= node.queue_capacity:
                    continue
                key = (node.occupied, (node.index - pool.cursor) % size)
                if best_key is None or key < best_key:
                    chosen, best_key = node, key
        if chosen is not None:
            pool.cursor = (chosen.index + 1) % size
        return chosen

    def submit(self, task: Task, decision: Decision) -> TraceEvent:
        """Execute a placement; overflowing layers escalate outward to the cloud."""
        layer = decision.layer
        rerouted = decision.rerouted
        original = decision.original_layer
        while True:
            pool = self.pools[layer]
            node = self._pick_node(pool)
            if node is not None:
                break
            if layer is Layer.CLOUD:
                if self.scenario.allow_drops:
                    logger.debug("task %s dropped: cloud queues full", task.id)
                    return self._dropped(task, decision.layer if original is None else original, rerouted)
                # Cloud is an unbounded sink: queue behind the earliest-free node.
                node = min(pool.nodes, key=lambda n: (n.busy_until, n.index))
                break
            logger.debug("task %s: %s pool full, escalating", task.id, layer.label)
            if original is None:
                original = layer
            rerouted = True
            layer = Layer(layer + 1)

        if layer is (decision.layer if decision.original_layer is None else decision.original_layer):
            # escalation brought the task back to the layer its policy chose
            rerouted, original = False, None

        spec = self.specs.get(layer)
        start = max(task.arrival_time, node.busy_until)
        wait = start - task.arrival_time
        t_proc = proc_time(task, spec)
        t_comm = comm_time(task, spec)
        t_enc = enc_time(task, self.scenario.encryption)
        finish = start + t_proc
        node.busy_until = finish
        pool.admit(node, finish)

        joules = energy(task, spec)
        if layer is Layer.EDGE and node.battery_capacity_j > 0.0:
            node.battery_j = max(0.0, node.battery_j - joules)

        if layer is Layer.FOG:
            accuracy = aggregate_results(pool.accuracies, pool.reliabilities)
        else:
            accuracy = aggregate_results([node.accuracy], [node.reliability])

        edge_fog = fog_cloud = 0.0
        for _, hop_to in self.routes[layer]:
            if hop_to is Layer.FOG:
                edge_fog = task.data_size
            elif task.category is TaskCategory.AGGREGATION:
                fog_cloud = task.data_size * (1.0 - self.scenario.summarization_reduction)
            else:
                fog_cloud = task.data_size

        total = wait + t_proc + t_comm + t_enc
        return TraceEvent(
            task_id=task.id,
            arrival_time=task.arrival_time,
            category=task.category,
            privacy=task.privacy,
            latency_req=task.latency_req,
            complexity=task.complexity,
            data_size=task.data_size,
            layer=layer,
            original_layer=original,
            rerouted=rerouted,
            node_index=node.index,
            queue_wait=wait,
            proc_time=t_proc,
            comm_time=t_comm,
            enc_time=t_enc,
            total_latency=total,
            energy=joules,
            reward=reward(task, spec, self.scenario.weights, self.scenario.encryption),
            accuracy=accuracy,
            bytes_edge_fog=edge_fog,
            bytes_fog_cloud=fog_cloud,
            deadline_met=total <= task.latency_req,
        )

    @staticmethod
    def _dropped(task: Task, intended: Layer, rerouted: bool) -> TraceEvent:
        return TraceEvent(
            task_id=task.id,
            arrival_time=task.arrival_time,
            category=task.category,
            privacy=task.privacy,
            latency_req=task.latency_req,
            complexity=task.complexity,
            data_size=task.data_size,
            layer=None,
            original_layer=intended,
            rerouted=rerouted,
            dropped=True,
        )


def bind_policy(binding: PolicyBinding, scenario: ScenarioSpec, specs: LayerSpecs) -> Orchestrator:
    agent = binding.agent
    if binding.online_learning and agent is not None:
        # Each run learns on its own copy.
        agent = agent.clone()
    return Orchestrator(
        binding.kind,
        specs,
        weights=scenario.weights,
        thresholds=scenario.thresholds,
        encryption=scenario.encryption,
        overload_threshold=scenario.overload_threshold,
        fog_high_complexity=scenario.fog_high_complexity,
        agent=agent,
        enforce_local_privacy=scenario.enforce_local_privacy,
        online_learning=binding.online_learning,
    )


def run(scenario: ScenarioSpec, binding: PolicyBinding) -> list[TraceEvent]:
    """One seeded simulation: one TraceEvent per generated task, in arrival order."""
    rng = np.random.default_rng(scenario.seed)
    tasks = generate_workload(scenario, rng)
    sim = Simulator(scenario, rng)
    orchestrator = bind_policy(binding, scenario, sim.specs)

    events: list[TraceEvent] = []
    for task in tasks:
        sim.advance(task.arrival_time)
        decision = orchestrator.orchestrate(task, sim.snapshot())
        event = sim.submit(task, decision)
        orchestrator.feedback(task, event)
        events.append(event)

    logger.info(
        "run %s seed=%d policy=%s: %d events, %d rerouted, %d dropped",
        scenario.name,
        scenario.seed,
        binding.name,
        len(events),
        sum(e.rerouted for e in events),
        sum(e.dropped for e in events),
    )
    return events


def replication_specs(scenario: ScenarioSpec, replications: int | None = None) -> list[ScenarioSpec]:
    """Per-run scenarios; None means scenario.replications."""
    if replications is None:
        replications = scenario.replications
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    return [scenario.model_copy(update={"seed": scenario.seed + i}) for i in range(replications)]


async def replicate_async(
    scenario: ScenarioSpec, binding: PolicyBinding, replications: int | None = None
) -> list[list[TraceEvent]]:
    runs = replication_specs(scenario, replications)
    # gather keeps submission order, so results line up with run index.
    return list(await asyncio.gather(*(asyncio.to_thread(run, spec, binding) for spec in runs)))


def replicate(
    scenario: ScenarioSpec,
    binding: PolicyBinding,
    replications: int | None = None,
    parallel: bool = False,
) -> list[list[TraceEvent]]:
    """Run i uses seed scenario.seed + i; output is ordered by run index."""
    if parallel:
        return asyncio.run(replicate_async(scenario, binding, replications))
    return [run(spec, binding) for spec in replication_specs(scenario, replications)]


class SimulationEnvironment:
    """Episodes of fresh tasks driven through a Simulator; rewards are the realized reward values."""

    def __init__(self, scenario: ScenarioSpec, tasks_per_episode: int = 50, seed: int = 0):
        if tasks_per_episode < 1:
            raise ValueError(f"tasks_per_episode must be >= 1, got {tasks_per_episode}")
        self.scenario = scenario
        self.seed = seed
        self.norms = normalization_bounds(scenario)
        # Same arrival rate as the full scenario.
        self.episode_scenario = scenario.model_copy(
            update={
                "task_count": tasks_per_episode,
                "duration": scenario.duration * tasks_per_episode / scenario.task_count,
            }
        )
        self._tasks: list[Task] = []
        self._cursor = 0
        self._sim: Simulator | None = None

    def reset(self, episode: int) -> None:
        rng = np.random.default_rng([self.seed, episode])
        self._tasks = generate_workload(self.episode_scenario, rng)
        self._sim = Simulator(self.episode_scenario, rng)
        self._cursor = 0

    def observe(self) -> tuple[Task, SystemState] | None:
        if self._sim is None:
            raise RuntimeError("call reset() before observe()")
        if self._cursor >= len(self._tasks):
            return None
        task = self._tasks[self._cursor]
        self._sim.advance(task.arrival_time)
        return task, self._sim.snapshot()

    def step(self, layer: Layer) -> tuple[float, Layer]:
        if self._sim is None or self._cursor >= len(self._tasks):
            raise RuntimeError("step() called without a pending observation")
        task = self._tasks[self._cursor]
        self._cursor += 1
        decision = Decision(
            task_id=task.id, layer=layer, predicted_latency=predicted_latency(task, self._sim.specs.get(layer))
        )
        event = self._sim.submit(task, decision)
        if event.layer is None:
            return 0.0, layer
        return event.reward, event.layer
