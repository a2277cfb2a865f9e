"""Dense feed-forward networks with explicit backpropagation.

Provides the layers, losses and ADAM optimizer used by the neural chord
predictors, plus a JSON model format whose doubles survive a round trip
bit-exactly.  Everything runs in double precision on plain numpy arrays.
Dropout uses the inverted convention (activations are rescaled by 1/keep at
training time), so evaluation applies no correction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "linear")


class DimensionMismatch(ValueError):
    """Array shapes disagree with the network or with each other."""


class NonOneHotTarget(ValueError):
    """Grouped cross-entropy requires concatenated one-hot targets."""


@dataclass(eq=False)
class Layer:
    """One dense layer: weights (fan_out, fan_in), bias (fan_out,)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionMismatch("layer weights and bias shapes disagree")


class DenseNet:
    """A stack of dense layers with inverted dropout after each hidden layer.

    Dropout is applied to every hidden activation but never to the input or
    to the output layer, and only when ``train=True``.
    """

    def __init__(self, layers: list[Layer], dropout_rate: float = 0.0, seed: int = 0):
        if not layers:
            raise ValueError("need at least one layer")
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError(f"dropout rate out of range: {dropout_rate}")
        for below, above in zip(layers, layers[1:]):
            if above.weights.shape[1] != below.weights.shape[0]:
                raise DimensionMismatch("consecutive layer widths disagree")
        self.layers = layers
        self.dropout_rate = float(dropout_rate)
        self.seed = int(seed)

    @classmethod
    def create(cls, dims: list[int], activations: list[str],
               dropout_rate: float = 0.0, seed: int = 0) -> "DenseNet":
        """Glorot-uniform initialized network: dims = [in, hidden..., out]."""
        if len(activations) != len(dims) - 1:
            raise DimensionMismatch("need one activation per layer")
        rng = np.random.default_rng(seed)
        layers = []
        for fan_in, fan_out, activation in zip(dims, dims[1:], activations):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
            layers.append(Layer(weights, np.zeros(fan_out), activation))
        return cls(layers, dropout_rate, seed)

    @property
    def in_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def parameters(self) -> list[np.ndarray]:
        """Live parameter arrays, weight then bias per layer."""
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.bias))
        return out

    def forward(self, x: np.ndarray, train: bool = False, rng=None):
        """Run the network; returns (output, cache) for use by backward.

        ``rng`` supplies the dropout masks and is required whenever
        ``train=True`` and the dropout rate is positive.
        """
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.in_dim:
            raise DimensionMismatch(f"input width {x.shape[1]}, expected {self.in_dim}")
        use_dropout = train and self.dropout_rate > 0.0
        if use_dropout and rng is None:
            raise ValueError("training forward pass with dropout needs an rng")
        cache = []
        out = x
        last = len(self.layers) - 1
        for index, layer in enumerate(self.layers):
            pre = out @ layer.weights.T + layer.bias
            post = np.maximum(pre, 0.0) if layer.activation == "relu" else pre
            mask = None
            if use_dropout and index < last:
                keep = 1.0 - self.dropout_rate
                mask = (rng.random(post.shape) < keep) / keep
                post = post * mask
            cache.append((out, pre, mask))
            out = post
        if squeeze:
            return out[0], cache
        return out, cache

    def backward(self, cache, grad_out: np.ndarray):
        """Backpropagate a loss gradient through a cached forward pass.

        Returns (grad_input, grads) where grads pairs up with parameters().
        """
        grad = np.asarray(grad_out, dtype=float)
        if grad.ndim == 1:
            grad = grad[None, :]
        grads: list[np.ndarray] = []
        for layer, (inp, pre, mask) in zip(reversed(self.layers), reversed(cache)):
            if mask is not None:
                grad = grad * mask
            if layer.activation == "relu":
                grad = grad * (pre > 0.0)
            grads.append(grad.sum(axis=0))      # bias
            grads.append(grad.T @ inp)          # weights
            grad = grad @ layer.weights
        grads.reverse()
        return grad, grads

    def copy(self) -> "DenseNet":
        layers = [Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers]
        return DenseNet(layers, self.dropout_rate, self.seed)


class Adam:
    """Bias-corrected ADAM updating a fixed list of parameter arrays in place."""

    def __init__(self, params: list[np.ndarray], learning_rate: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.epsilon = beta1, beta2, epsilon
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.step_count = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise DimensionMismatch("gradient list length mismatch")
        self.step_count += 1
        correct1 = 1.0 - self.beta1 ** self.step_count
        correct2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise DimensionMismatch(f"gradient shape {g.shape} vs parameter {p.shape}")
            m[...] = self.beta1 * m + (1.0 - self.beta1) * g
            v[...] = self.beta2 * v + (1.0 - self.beta2) * (g * g)
            p -= self.learning_rate * (m / correct1) / (np.sqrt(v / correct2) + self.epsilon)


def mse_loss(output: np.ndarray, target: np.ndarray):
    """Mean squared error over all entries; returns (loss, gradient)."""
    output = np.asarray(output, dtype=float)
    target = np.asarray(target, dtype=float)
    if output.shape != target.shape:
        raise DimensionMismatch(f"{output.shape} vs {target.shape}")
    diff = output - target
    return float((diff * diff).mean()), (2.0 / diff.size) * diff


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-subtracted softmax."""
    shifted = logits - logits.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def grouped_cross_entropy(logits: np.ndarray, target: np.ndarray, group_size: int):
    """Softmax cross-entropy applied per group of ``group_size`` outputs.

    The loss is the negative log-likelihood of each group's one-hot target,
    averaged over groups (and over the batch).  Returns (loss, gradient at
    the logits).
    """
    logits = np.asarray(logits, dtype=float)
    target = np.asarray(target, dtype=float)
    squeeze = logits.ndim == 1
    if squeeze:
        logits, target = logits[None, :], target[None, :]
    if logits.shape != target.shape:
        raise DimensionMismatch(f"{logits.shape} vs {target.shape}")
    if logits.shape[1] % group_size != 0:
        raise DimensionMismatch(f"width {logits.shape[1]} not divisible by {group_size}")
    batch, groups = logits.shape[0], logits.shape[1] // group_size
    lg = logits.reshape(batch, groups, group_size)
    tg = target.reshape(batch, groups, group_size)
    if not (np.isin(tg, (0.0, 1.0)).all() and (tg.sum(axis=2) == 1.0).all()):
        raise NonOneHotTarget("each target group must be exactly one-hot")
    shifted = lg - lg.max(axis=2, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=2, keepdims=True))
    loss = float(-(tg * log_probs).sum() / (batch * groups))
    grad = (np.exp(log_probs) - tg) / (batch * groups)
    grad = grad.reshape(batch, groups * group_size)
    return loss, (grad[0] if squeeze else grad)


def net_to_dict(net: DenseNet) -> dict:
    """JSON-ready description; doubles round-trip bit-exactly via repr."""
    return {
        "dropout_rate": net.dropout_rate,
        "seed": net.seed,
        "layers": [
            {
                "activation": l.activation,
                "weights": l.weights.tolist(),
                "bias": l.bias.tolist(),
            }
            for l in net.layers
        ],
    }


def net_from_dict(doc: dict) -> DenseNet:
    layers = [Layer(np.array(l["weights"], dtype=float),
                    np.array(l["bias"], dtype=float),
                    l["activation"])
              for l in doc["layers"]]
    return DenseNet(layers, doc["dropout_rate"], doc.get("seed", 0))


def net_to_json(net: DenseNet) -> str:
    return json.dumps(net_to_dict(net), sort_keys=True)


def net_from_json(text: str) -> DenseNet:
    return net_from_dict(json.loads(text))
