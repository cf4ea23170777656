"""Deep Q-learning agent: state encoding, epsilon-greedy action, replay training loop."""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol

import numpy as np
from tqdm import tqdm

from core.cost_model import argmax_toward_source, reward
from core.views import EncryptionParams, Layer, LayerSpecs, Task, WeightConfig
from policy.views import SystemState
from rl.qnetwork import AdamOptimizer, QFunction, SGDOptimizer, make_optimizer
from rl.replay import ReplayBuffer
from rl.views import ACTION_COUNT, STATE_DIM, AgentConfig, NormalizationBounds, Transition

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    pass


class TrainingEnvironment(Protocol):
    """What train() needs from a simulator: episodes of (task, state) observations."""

    norms: NormalizationBounds

    def reset(self, episode: int) -> None: ...

    def observe(self) -> tuple[Task, SystemState] | None: ...

    def step(self, layer: Layer) -> tuple[float, Layer]: ...


def _log_unit(value: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    x = (math.log(value) - math.log(lo)) / (math.log(hi) - math.log(lo))
    return min(1.0, max(0.0, x))


def _linear_unit(value: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


def encode_state(task: Task, state: SystemState, norms: NormalizationBounds) -> np.ndarray:
    """Seven features in [0, 1]: log latency, log complexity, privacy, data size, layer utilizations."""
    return np.array(
        [
            _log_unit(task.latency_req, norms.latency),
            _log_unit(task.complexity, norms.complexity),
            float(task.privacy),
            _linear_unit(task.data_size, norms.data_size),
            *state.queue_utilization,
        ],
        dtype=np.float64,
    )


def act(qf: QFunction, s: np.ndarray, epsilon: float, rng: np.random.Generator) -> Layer:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    # epsilon == 0 never touches the generator, so greedy use stays a pure function.
    if epsilon > 0.0 and rng.random() < epsilon:
        return Layer(int(rng.integers(ACTION_COUNT)))
    return argmax_toward_source(qf.forward(s))


def epsilon_at(cfg: AgentConfig, episode: int) -> float:
    """Exponential decay from epsilon_start to epsilon_end, then flat."""
    decay_episodes = max(1, round(cfg.episodes * cfg.epsilon_decay_fraction))
    if episode >= decay_episodes:
        return cfg.epsilon_end
    frac = episode / decay_episodes
    start, end = cfg.epsilon_start, cfg.epsilon_end
    if start <= 0.0 or end <= 0.0:
        return start + (end - start) * frac
    return start * (end / start) ** frac


class DQNAgent:
    def __init__(
        self,
        qfunction: QFunction,
        norms: NormalizationBounds,
        cfg: AgentConfig | None = None,
        rng: np.random.Generator | None = None,
        episodes_trained: int = 0,
    ):
        self.cfg = cfg or AgentConfig()
        if qfunction.dims[0] != STATE_DIM or qfunction.output_size != ACTION_COUNT:
            raise ValueError(f"Q-function must map {STATE_DIM} inputs to {ACTION_COUNT} outputs, got {qfunction.dims}")
        self.qfunction = qfunction
        self.norms = norms
        self.rng = rng if rng is not None else np.random.default_rng(self.cfg.seed)
        self.episodes_trained = episodes_trained
        self.replay = ReplayBuffer(self.cfg.replay_capacity)
        self.optimizer: SGDOptimizer | AdamOptimizer = make_optimizer(
            self.cfg.optimizer, qfunction.params.size, self.cfg.learning_rate
        )
        self.target = qfunction.copy() if self.cfg.use_target_network else None
        self.updates = 0

    @classmethod
    def create(cls, cfg: AgentConfig, norms: NormalizationBounds) -> DQNAgent:
        rng = np.random.default_rng(cfg.seed)
        return cls(QFunction.initialize(cfg.dims, rng), norms, cfg, rng=rng)

    def encode(self, task: Task, state: SystemState) -> np.ndarray:
        return encode_state(task, state, self.norms)

    def q_values(self, s: np.ndarray) -> np.ndarray:
        return self.qfunction.forward(s)

    def greedy(self, s: np.ndarray) -> Layer:
        return argmax_toward_source(self.q_values(s))

    def act(self, s: np.ndarray, epsilon: float) -> Layer:
        return act(self.qfunction, s, epsilon, self.rng)

    def observe(self, transition: Transition) -> None:
        self.replay.push(transition)

    def learn_step(self) -> float:
        """One gradient step on a replay batch; returns the batch loss."""
        states, actions, rewards, next_states, terminals = self.replay.sample(self.cfg.batch_size, self.rng)
        targets = rewards.copy()
        if self.cfg.discount > 0.0:
            bootstrap_net = self.target or self.qfunction
            bootstrap = bootstrap_net.forward_batch(next_states).max(axis=1)
            targets += self.cfg.discount * bootstrap * (~terminals)
        loss, grad = self.qfunction.batch_gradient(states, actions, targets)
        self.optimizer.step(self.qfunction.params, grad)
        self.updates += 1
        if self.target is not None and self.updates % self.cfg.target_sync_every == 0:
            self.target.params[...] = self.qfunction.params
        return loss

    def clone(self) -> DQNAgent:
        return copy.deepcopy(self)


@dataclass
class TrainingResult:
    agent: DQNAgent
    initial_params: np.ndarray
    learning_curve: list[float] = field(default_factory=list)


def _learn(agent: DQNAgent, transition: Transition, episode: int) -> None:
    agent.observe(transition)
    agent.learn_step()
    if not agent.qfunction.is_finite():
        raise TrainingDivergedError(
            f"non-finite Q-function parameter at episode {episode} (update {agent.updates}); "
            f"signals learning-rate misconfiguration (learning_rate={agent.cfg.learning_rate})"
        )


def train(
    env: TrainingEnvironment,
    cfg: AgentConfig,
    agent: DQNAgent | None = None,
    progress: bool = False,
) -> TrainingResult:
    """Run cfg.episodes episodes, one replay gradient step per decision."""
    agent = agent or DQNAgent.create(cfg, env.norms)
    initial = agent.qfunction.params.copy()
    curve: list[float] = []
    bootstrapping = cfg.discount > 0.0
    report_every = max(1, cfg.episodes // 10)

    episodes: Iterable[int] = range(cfg.episodes)
    if progress:
        episodes = tqdm(episodes, desc="training", unit="episode")

    for episode in episodes:
        epsilon = epsilon_at(cfg, episode)
        env.reset(episode)
        rewards: list[float] = []
        pending: Transition | None = None
        while (observation := env.observe()) is not None:
            task, state = observation
            s = agent.encode(task, state)
            if pending is not None:
                pending.terminal, pending.next_state = False, s
                _learn(agent, pending, episode)
                pending = None
            layer = agent.act(s, epsilon)
            value, executed = env.step(layer)
            rewards.append(value)
            transition = Transition(state=s, action=executed, reward=value)
            if bootstrapping:
                pending = transition
            else:
                _learn(agent, transition, episode)
        if pending is not None:
            _learn(agent, pending, episode)

        curve.append(float(np.mean(rewards)) if rewards else 0.0)
        if (episode + 1) % report_every == 0:
            logger.info(
                "episode %d/%d mean reward %.4f epsilon %.3f", episode + 1, cfg.episodes, curve[-1], epsilon
            )

    agent.episodes_trained += cfg.episodes
    return TrainingResult(agent=agent, initial_params=initial, learning_curve=curve)


def reward_argmax(task: Task, specs: LayerSpecs, w: WeightConfig, ep: EncryptionParams) -> Layer:
    """Exhaustive three-way reward maximization; the per-task oracle for the learned policy."""
    return argmax_toward_source([reward(task, spec, w, ep) for spec in specs])


def greedy_agreement(
    agent: DQNAgent,
    tasks: Iterable[Task],
    oracle: Callable[[Task], Layer],
    state: SystemState | None = None,
) -> float:
    state = state or SystemState()
    tasks = list(tasks)
    if not tasks:
        raise ValueError("greedy_agreement needs at least one task")
    hits = sum(agent.greedy(agent.encode(task, state)) is oracle(task) for task in tasks)
    return hits / len(tasks)
