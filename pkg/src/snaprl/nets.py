"""Fixed-topology MLPs with hand-written backpropagation.

Networks are rectifier MLPs with a linear final layer, held as plain
float64 numpy arrays. Backprop is written out explicitly so gradients
can be validated against finite differences; there is no autodiff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Mlp:
    """Weights and biases of a feed-forward net; W[i] has shape (in, out)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        return Mlp(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def init_mlp(sizes: list[int], rng: np.random.Generator) -> Mlp:
    """Uniform fan-in init: W, b ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(weights=weights, biases=biases)


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Forward pass: relu on hidden layers, linear output. x is (B, in)."""
    h = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
    return h @ net.weights[-1] + net.biases[-1]


def mlp_forward_cached(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass that keeps each layer's input for the backward pass."""
    acts = [x]
    h = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        acts.append(h)
    return h @ net.weights[-1] + net.biases[-1], acts


def mlp_backward(
    net: Mlp,
    acts: list[np.ndarray],
    dout: np.ndarray,
    need_input_grad: bool = False,
) -> tuple[list[np.ndarray], np.ndarray | None]:
    """Backprop dout through the net.

    Returns gradients in ``net.params()`` order and, optionally, the
    gradient with respect to the input batch.
    """
    n_layers = len(net.weights)
    grad_w: list[np.ndarray | None] = [None] * n_layers
    grad_b: list[np.ndarray | None] = [None] * n_layers
    delta = dout
    for i in range(n_layers - 1, -1, -1):
        a = acts[i]
        grad_w[i] = a.T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (a > 0.0)
        elif need_input_grad:
            delta = delta @ net.weights[i].T
    grads: list[np.ndarray] = []
    for gw, gb in zip(grad_w, grad_b):
        grads.append(gw)
        grads.append(gb)
    return grads, (delta if need_input_grad else None)


def polyak_update(target: Mlp, online: Mlp, tau: float) -> None:
    """In-place exponential target update: t <- tau * p + (1 - tau) * t."""
    for tp, op in zip(target.params(), online.params()):
        tp *= 1.0 - tau
        tp += tau * op
