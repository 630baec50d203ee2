"""Small fully connected networks in plain numpy.

``Network`` exposes forward/backward passes against an arbitrary output
gradient so the same code serves the squared-error regressor and the actor and
critic heads used by the soft actor-critic baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Network:
    """Tanh hidden layers, linear output. ``weights[k]`` has shape ``(fan_in, fan_out)``."""

    weights: list
    biases: list

    @classmethod
    def init(cls, sizes, rng, zero_output: bool = False) -> "Network":
        weights, biases = [], []
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            last = k == len(sizes) - 2
            if last and zero_output:
                weights.append(np.zeros((fan_in, fan_out)))
            else:
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def sizes(self) -> list:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    def copy(self) -> "Network":
        return Network([W.copy() for W in self.weights], [b.copy() for b in self.biases])

    def params(self) -> list:
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend((W, b))
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def set_flat(self, vec: np.ndarray) -> None:
        k = 0
        for p in self.params():
            p[...] = vec[k:k + p.size].reshape(p.shape)
            k += p.size

    def forward(self, X: np.ndarray, keep: bool = False):
        acts = [X]
        h = X
        last = len(self.weights) - 1
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if k < last:
                h = np.tanh(h)
            acts.append(h)
        return (h, acts) if keep else h

    def backward(self, acts: list, grad_out: np.ndarray) -> list:
        """Gradients ``[dW0, db0, dW1, db1, ...]`` given ``d loss / d output``."""
        grads = []
        delta = grad_out
        for k in range(len(self.weights) - 1, -1, -1):
            grads.append(delta.sum(axis=0))
            grads.append(acts[k].T @ delta)
            if k > 0:
                delta = (delta @ self.weights[k].T) * (1.0 - acts[k] ** 2)
        grads.reverse()
        return grads

    def polyak_from(self, other: "Network", rho: float) -> None:
        """In place: ``self <- rho * self + (1 - rho) * other``."""
        for p, q in zip(self.params(), other.params()):
            p *= rho
            p += (1.0 - rho) * q


def mse_gradient(net: Network, X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its flat gradient w.r.t. all parameters."""
    if len(X) == 0:
        raise ValueError("empty batch")
    out, acts = net.forward(X, keep=True)
    err = out[:, 0] - y
    loss = float(np.mean(err ** 2))
    grads = net.backward(acts, (2.0 / len(y)) * err[:, None])
    return loss, np.concatenate([g.ravel() for g in grads])


class Momentum:
    def __init__(self, net: Network, step: float, momentum: float = 0.9):
        self.step = step
        self.momentum = momentum
        self.velocity = np.zeros(net.flat().size)

    def update(self, net: Network, grad: np.ndarray) -> None:
        self.velocity = self.momentum * self.velocity - self.step * grad
        net.set_flat(net.flat() + self.velocity)


class Adam:
    def __init__(self, net: Network, step: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.step = step
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        n = net.flat().size
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def update(self, net: Network, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        mhat = self.m / (1 - self.beta1 ** self.t)
        vhat = self.v / (1 - self.beta2 ** self.t)
        net.set_flat(net.flat() - self.step * mhat / (np.sqrt(vhat) + self.eps))


@dataclass(frozen=True)
class MLPModel:
    net: Network

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.net.forward(np.asarray(X, dtype=np.float64))[:, 0]


def fit_mlp(X, y, hidden=(128, 128), step_size=1e-3, momentum=0.9, epochs=200,
            batch_size=32, seed=0) -> MLPModel:
    """Mini-batch momentum SGD on squared error.

    The output layer starts at zero weight with bias at the target mean, so a
    constant target is fitted exactly from the first step.
    """
    rng = np.random.default_rng(seed)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    net = Network.init([X.shape[1], *hidden, 1], rng, zero_output=True)
    net.biases[-1][0] = float(y[0]) if np.ptp(y) == 0 else float(np.mean(y))
    opt = Momentum(net, step_size, momentum)
    n = len(y)
    for _ in range(epochs):
        perm = rng.permutation(n)
        for k in range(0, n, batch_size):
            idx = perm[k:k + batch_size]
            _, grad = mse_gradient(net, X[idx], y[idx])
            opt.update(net, grad)
    return MLPModel(net)
