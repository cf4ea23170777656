from __future__ import annotations

from typing import Iterator

import numpy as np

from core.views import Layer
from rl.views import STATE_DIM, Transition


class ReplayBuffer:
    """Fixed-capacity ring of transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, state_dim: int = STATE_DIM):
        if capacity < 1:
            raise ValueError(f"replay capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim), dtype=np.float64)
        self.next_states = np.zeros((capacity, state_dim), dtype=np.float64)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float64)
        self.terminals = np.ones(capacity, dtype=bool)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, transition: Transition) -> None:
        i = self._next
        self.states[i] = transition.state
        self.actions[i] = int(transition.action)
        self.rewards[i] = transition.reward
        self.terminals[i] = transition.terminal
        if transition.next_state is not None:
            self.next_states[i] = transition.next_state
        else:
            self.next_states[i] = 0.0
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _ordered_indices(self) -> np.ndarray:
        start = (self._next - self._size) % self.capacity
        return (start + np.arange(self._size)) % self.capacity

    def __iter__(self) -> Iterator[Transition]:
        """Oldest first."""
        for i in self._ordered_indices():
            yield Transition(
                state=self.states[i].copy(),
                action=Layer(int(self.actions[i])),
                reward=float(self.rewards[i]),
                terminal=bool(self.terminals[i]),
                next_state=None if self.terminals[i] else self.next_states[i].copy(),
            )

    def sample(self, batch_size: int, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
        """Uniform sample with replacement: (states, actions, rewards, next_states, terminals)."""
        if self._size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        # Slots are filled 0..size-1 before the ring wraps, so raw indices are valid.
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.terminals[idx],
        )
