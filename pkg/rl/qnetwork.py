"""Feed-forward Q-function in numpy with hand-written backpropagation.

All weights and biases live in one flat float64 vector; the per-layer
matrices are reshaped views into it, so optimizers and serialization work on
the flat array while the forward pass reads the views.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def _layer_shapes(dims: Sequence[int]) -> list[tuple[tuple[int, int], tuple[int]]]:
    return [((dims[i], dims[i + 1]), (dims[i + 1],)) for i in range(len(dims) - 1)]


def param_count(dims: Sequence[int]) -> int:
    return sum(w[0] * w[1] + b[0] for w, b in _layer_shapes(dims))


class QFunction:
    """Rectifier network mapping a state encoding to one Q-value per layer."""

    def __init__(self, dims: Sequence[int], params: np.ndarray | None = None):
        if len(dims) < 2:
            raise ValueError(f"need at least input and output sizes, got {tuple(dims)}")
        self.dims = tuple(int(d) for d in dims)
        size = param_count(self.dims)
        if params is None:
            params = np.zeros(size, dtype=np.float64)
        params = np.ascontiguousarray(params, dtype=np.float64)
        if params.shape != (size,):
            raise ValueError(f"expected {size} parameters for dims {self.dims}, got shape {params.shape}")
        self.params = params
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        offset = 0
        for w_shape, b_shape in _layer_shapes(self.dims):
            n_w = w_shape[0] * w_shape[1]
            self.weights.append(self.params[offset : offset + n_w].reshape(w_shape))
            offset += n_w
            self.biases.append(self.params[offset : offset + b_shape[0]])
            offset += b_shape[0]

    @classmethod
    def initialize(cls, dims: Sequence[int], rng: np.random.Generator) -> QFunction:
        """He initialization: weights ~ N(0, 2/fan_in), biases zero."""
        qf = cls(dims)
        for w in qf.weights:
            w[...] = rng.normal(0.0, np.sqrt(2.0 / w.shape[0]), size=w.shape)
        return qf

    def copy(self) -> QFunction:
        return QFunction(self.dims, self.params.copy())

    @property
    def output_size(self) -> int:
        return self.dims[-1]

    def _forward(self, states: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        inputs = [states]
        pre_activations = []
        h = states
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre_activations.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            if i != last:
                inputs.append(h)
        return h, inputs, pre_activations

    def forward(self, state: np.ndarray) -> np.ndarray:
        q, _, _ = self._forward(np.asarray(state, dtype=np.float64)[None, :])
        return q[0]

    def forward_batch(self, states: np.ndarray) -> np.ndarray:
        q, _, _ = self._forward(np.asarray(states, dtype=np.float64))
        return q

    def batch_gradient(
        self, states: np.ndarray, actions: np.ndarray, targets: np.ndarray
    ) -> tuple[float, np.ndarray]:
        """Mean squared TD error over the batch and its gradient w.r.t. the flat parameters.

        Only the selected action's output unit enters the loss, so the other
        output heads get exactly zero gradient.
        """
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.float64)
        batch = states.shape[0]
        rows = np.arange(batch)

        q, inputs, pre_activations = self._forward(states)
        error = q[rows, actions] - targets
        loss = float(np.mean(error**2))

        delta = np.zeros_like(q)
        delta[rows, actions] = 2.0 * error / batch

        grad = np.zeros_like(self.params)
        grad_view = QFunction(self.dims, grad)
        grad_weights, grad_biases = grad_view.weights, grad_view.biases
        for i in range(len(self.weights) - 1, -1, -1):
            grad_weights[i][...] = inputs[i].T @ delta
            grad_biases[i][...] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (pre_activations[i - 1] > 0.0)
        return loss, grad

    def gradient(self, state: np.ndarray, action: int, td_target: float) -> np.ndarray:
        """Gradient of (Q(state)[action] - td_target)^2 for a single sample."""
        _, grad = self.batch_gradient(
            np.asarray(state, dtype=np.float64)[None, :],
            np.array([int(action)]),
            np.array([float(td_target)]),
        )
        return grad

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.params)))


class SGDOptimizer:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        params -= self.learning_rate * grad


class AdamOptimizer:
    def __init__(self, size: int, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size, dtype=np.float64)
        self.v = np.zeros(size, dtype=np.float64)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        if self.learning_rate == 0.0:
            return
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        params -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name: str, size: int, learning_rate: float) -> SGDOptimizer | AdamOptimizer:
    if name == "adam":
        return AdamOptimizer(size, learning_rate)
    if name == "sgd":
        return SGDOptimizer(learning_rate)
    raise ValueError(f"Unknown optimizer '{name}'. Expected 'adam' or 'sgd'")
