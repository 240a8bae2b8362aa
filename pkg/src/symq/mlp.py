"""Feed-forward ReLU networks with hand-written backprop, Adam and Polyak averaging.

All arrays are float64. Inputs may be a single vector or a batch (rows are
samples); outputs keep the same leading shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

FORMAT_NAME = "symq-mlp"
FORMAT_VERSION = 1


class MlpNet:
    """Dense network: ReLU on hidden layers, identity on the output layer."""

    def __init__(self, layer_sizes, rng: np.random.Generator | None = None):
        sizes = [int(n) for n in layer_sizes]
        if len(sizes) < 2 or any(n < 1 for n in sizes):
            raise ShapeError(f"layer_sizes must hold at least two positive sizes, got {layer_sizes!r}")
        self.layer_sizes = sizes
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
                b = np.zeros(fan_out)
            else:
                bound = 1.0 / np.sqrt(fan_in)
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.weights.append(w)
            self.biases.append(b)

    @property
    def params(self) -> list[np.ndarray]:
        """Parameter arrays in the order W0, b0, W1, b1, ... (views, not copies)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "MlpNet":
        twin = MlpNet(self.layer_sizes)
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim not in (1, 2) or x.shape[-1] != self.in_dim:
            raise ShapeError(f"expected input with last dimension {self.in_dim}, got shape {x.shape}")
        return x

    def forward(self, x) -> np.ndarray:
        out, _ = self.forward_cache(x)
        return out

    def forward_cache(self, x):
        """Evaluate the net and keep the layer inputs needed by :meth:`backward`."""
        x = self._check_input(x)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        inputs = []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
        return (h[0] if squeeze else h), (inputs, squeeze)

    def backward(self, cache, upstream):
        """Contract d(output)/d(params) with ``upstream``.

        Returns ``(param_grads, input_grad)`` where ``param_grads`` follows the
        order of :attr:`params`. Gradients are summed over the batch.
        """
        inputs, squeeze = cache
        g = np.asarray(upstream, dtype=float)
        if squeeze:
            g = g[None, :]
        batch = inputs[0].shape[0]
        if g.shape != (batch, self.out_dim):
            raise ShapeError(f"upstream gradient shape {g.shape} != {(batch, self.out_dim)}")
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            h_in = inputs[i]
            grads_w[i] = h_in.T @ g
            grads_b[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                # h_in is a post-ReLU activation; zero entries had non-positive pre-activations.
                g = g * (h_in > 0.0)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.extend((gw, gb))
        return grads, (g[0] if squeeze else g)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "layer_sizes": list(self.layer_sizes),
            "params": [p.ravel().tolist() for p in self.params],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpNet":
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise ShapeError(f"unsupported network format {data.get('format')!r} v{data.get('version')!r}")
        net = cls(data["layer_sizes"])
        flat = data["params"]
        if len(flat) != len(net.params):
            raise ShapeError("parameter count does not match layer sizes")
        for dst, src in zip(net.params, flat):
            values = np.asarray(src, dtype=float)
            if values.size != dst.size:
                raise ShapeError("parameter block size does not match layer sizes")
            dst[...] = values.reshape(dst.shape)
        return net

    def __eq__(self, other):
        if not isinstance(other, MlpNet) or other.layer_sizes != self.layer_sizes:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.params, other.params))

    __hash__ = None


def forward(net: MlpNet, x) -> np.ndarray:
    return net.forward(x)


def backward(net: MlpNet, x, upstream) -> list[np.ndarray]:
    """Parameter gradients of ``upstream . net(x)``."""
    _, cache = net.forward_cache(x)
    grads, _ = net.backward(cache, upstream)
    return grads


def save_net(net: MlpNet, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_dict(), fh)


def load_net(path) -> MlpNet:
    with open(path) as fh:
        return MlpNet.from_dict(json.load(fh))


@dataclass
class AdamState:
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, learning_rate=3e-4, **kwargs) -> "AdamState":
        state = cls(learning_rate=learning_rate, **kwargs)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step": self.step,
            "m": [a.tolist() for a in self.m],
            "v": [a.tolist() for a in self.v],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdamState":
        state = cls(
            learning_rate=data["learning_rate"],
            beta1=data["beta1"],
            beta2=data["beta2"],
            eps=data["eps"],
            step=data["step"],
        )
        state.m = [np.asarray(a, dtype=float) for a in data["m"]]
        state.v = [np.asarray(a, dtype=float) for a in data["v"]]
        return state


def adam_step(state: AdamState, params, grads) -> None:
    """Apply one bias-corrected Adam update to ``params`` in place."""
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameter arrays but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(state.m) != len(params):
        raise ShapeError("Adam state does not match the parameter list")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    lr_t = state.learning_rate * np.sqrt(1.0 - b2**state.step) / (1.0 - b1**state.step)
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=float)
        if g.shape != p.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        # eps scaled to match the textbook form m_hat / (sqrt(v_hat) + eps)
        p -= lr_t * m / (np.sqrt(v) + state.eps * np.sqrt(1.0 - b2**state.step))


def polyak_update(target: MlpNet, online: MlpNet, rho: float) -> None:
    """target <- rho * target + (1 - rho) * online, in place."""
    if target.layer_sizes != online.layer_sizes:
        raise ShapeError(f"architecture mismatch {target.layer_sizes} vs {online.layer_sizes}")
    if not 0.0 <= rho <= 1.0:
        raise ShapeError(f"rho must lie in [0, 1], got {rho}")
    for t, o in zip(target.params, online.params):
        if rho == 0.0:
            t[...] = o
        else:
            # Difference form: exactly the identity when target == online.
            t += (1.0 - rho) * (o - t)
