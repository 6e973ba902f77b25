"""Dense feedforward networks in numpy: classifier, autoencoder, backprop and SGD."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset

__all__ = [
    "ACTIVATIONS",
    "LayerParams",
    "Network",
    "TrainConfig",
    "TrainingError",
    "AutoencoderSpec",
    "init_network",
    "build_classifier",
    "build_autoencoder",
    "build_autoencoder_spec",
    "forward",
    "loss_value",
    "gradients",
    "fit_arrays",
    "train",
    "predict_proba",
    "dump_network",
    "load_network",
]

ACTIVATIONS = ("relu", "sigmoid", "identity")
LOSSES = ("binary_cross_entropy", "mse")


class TrainingError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


def _sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return _sigmoid(z)
    return z


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass(frozen=True, eq=False)
class LayerParams:
    weights: np.ndarray  # (out_units, in_units)
    bias: np.ndarray     # (out_units,)
    activation: str = "relu"

    def __post_init__(self):
        W = np.array(self.weights, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64).ravel()
        if W.ndim != 2 or b.shape[0] != W.shape[0]:
            raise ValueError(f"weights {W.shape} and bias {b.shape} do not match")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)

    @property
    def in_units(self) -> int:
        return self.weights.shape[1]

    @property
    def out_units(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class Network:
    layers: tuple[LayerParams, ...]
    input_dim: int = field(default=0)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        input_dim = self.input_dim or layers[0].in_units
        width = input_dim
        for i, layer in enumerate(layers):
            if layer.in_units != width:
                raise ValueError(
                    f"layer {i} expects {layer.in_units} inputs, previous width is {width}"
                )
            width = layer.out_units
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input_dim", input_dim)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_units

    @property
    def sizes(self) -> list[int]:
        return [self.input_dim] + [layer.out_units for layer in self.layers]

    @property
    def is_classifier(self) -> bool:
        return self.output_dim == 1 and self.layers[-1].activation == "sigmoid"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 0.1
    batch_size: int = 64
    loss: str = "binary_cross_entropy"
    seed: int = 0
    clip_norm: float | None = None  # cap on the global gradient norm per step

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise ValueError("clip_norm must be positive")


@dataclass(frozen=True)
class AutoencoderSpec:
    input_dim: int
    bottleneck: int
    hidden_sizes: tuple[int, ...]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden_sizes, self.input_dim]


def init_network(sizes, activations, seed: int = 0) -> Network:
    """He-style normal init for ReLU layers, 1/fan-in variance otherwise; zero biases."""
    if len(activations) != len(sizes) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        scale = math.sqrt((2.0 if act == "relu" else 1.0) / fan_in)
        W = rng.normal(0.0, scale, size=(fan_out, fan_in))
        layers.append(LayerParams(W, np.zeros(fan_out), act))
    return Network(tuple(layers), sizes[0])


def build_classifier(input_dim: int, hidden, seed: int = 0) -> Network:
    hidden = list(hidden)
    return init_network(
        [input_dim, *hidden, 1], ["relu"] * len(hidden) + ["sigmoid"], seed
    )


def build_autoencoder_spec(input_dim: int, bottleneck: int) -> AutoencoderSpec:
    """Powers-of-two encoder/decoder layout.

    The encoder starts at the largest power of two strictly below
    ``input_dim`` and halves until it reaches ``bottleneck``; the decoder
    mirrors it. When that power of two does not exceed the bottleneck there is
    a single hidden layer of that size, and inputs of width <= 2 get one unit.

    >>> build_autoencoder_spec(784, 128).hidden_sizes
    (512, 256, 128, 256, 512)
    """
    if input_dim < 1 or bottleneck < 1:
        raise ValueError("input_dim and bottleneck must be positive")
    if input_dim <= 2:
        return AutoencoderSpec(input_dim, 1, (1,))
    top = 1 << ((input_dim - 1).bit_length() - 1)
    if top <= bottleneck:
        return AutoencoderSpec(input_dim, top, (top,))
    encoder = []
    width = top
    while width > bottleneck:
        encoder.append(width)
        width //= 2
    encoder.append(bottleneck)
    hidden = encoder + encoder[-2::-1]
    return AutoencoderSpec(input_dim, bottleneck, tuple(hidden))


def build_autoencoder(spec: AutoencoderSpec, seed: int = 0) -> Network:
    sizes = spec.layer_sizes
    acts = ["relu"] * len(spec.hidden_sizes) + ["identity"]
    return init_network(sizes, acts, seed)


def _forward_cache(net: Network, X: np.ndarray):
    pre, acts = [], [X]
    a = X
    for layer in net.layers:
        z = a @ layer.weights.T + layer.bias
        a = _activate(layer.activation, z)
        pre.append(z)
        acts.append(a)
    return pre, acts


def _as_batch(net: Network, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise ValueError(f"expected inputs of width {net.input_dim}, got shape {X.shape}")
    return X


def forward(net: Network, x) -> list[np.ndarray]:
    """Activations of every layer for input ``x`` (vector or row matrix).

    The returned list has one entry per layer; the last is the network output.
    A vector input yields vector activations.
    """
    single = np.ndim(x) == 1
    _, acts = _forward_cache(net, _as_batch(net, x))
    acts = acts[1:]
    return [a[0] for a in acts] if single else acts


def _targets(Y, n_rows: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != n_rows:
        raise ValueError(f"{n_rows} inputs but {Y.shape[0]} targets")
    return Y


def _loss_from(loss: str, z_out, a_out, Y) -> float:
    if loss == "mse":
        # mean over samples of the per-sample summed squared error
        return float(np.mean(np.sum((a_out - Y) ** 2, axis=1)))
    # cross-entropy from logits: softplus(z) - y*z
    per = np.logaddexp(0.0, z_out) - Y * z_out
    return float(np.mean(np.sum(per, axis=1)))


def _check_loss(net: Network, loss: str) -> None:
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    if loss == "binary_cross_entropy" and net.layers[-1].activation != "sigmoid":
        raise ValueError("binary cross-entropy needs a sigmoid output layer")


def loss_value(net: Network, X, Y, loss: str) -> float:
    _check_loss(net, loss)
    X = _as_batch(net, X)
    Y = _targets(Y, X.shape[0])
    pre, acts = _forward_cache(net, X)
    return _loss_from(loss, pre[-1], acts[-1], Y)


def _backprop(net: Network, X, Y, loss: str):
    pre, acts = _forward_cache(net, X)
    n = X.shape[0]
    out_act = net.layers[-1].activation
    if loss == "binary_cross_entropy":
        delta = (acts[-1] - Y) / n
    else:
        delta = 2.0 * (acts[-1] - Y) / n
        delta = delta * _activation_grad(out_act, pre[-1], acts[-1])
    grads = [None] * len(net.layers)
    for l in range(len(net.layers) - 1, -1, -1):
        grads[l] = (delta.T @ acts[l], delta.sum(axis=0))
        if l > 0:
            below = net.layers[l - 1]
            delta = (delta @ net.layers[l].weights) * _activation_grad(
                below.activation, pre[l - 1], acts[l]
            )
    return grads, _loss_from(loss, pre[-1], acts[-1], Y)


def gradients(net: Network, batch, loss: str) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact gradients of the mean batch loss, as ``(dW, db)`` per layer.

    ``batch`` is ``(X, Y)``; ``Y`` holds 0/1 labels for a classifier or target
    rows for an autoencoder.
    """
    X, Y = batch
    _check_loss(net, loss)
    X = _as_batch(net, X)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    Y = _targets(Y, X.shape[0])
    if Y.shape[1] != net.output_dim:
        raise ValueError(f"targets have width {Y.shape[1]}, network outputs {net.output_dim}")
    grads, _ = _backprop(net, X, Y, loss)
    return grads


def fit_arrays(net: Network, X, Y, cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Mini-batch gradient descent on arrays; returns a new network.

    The batch order is reshuffled every epoch from ``cfg.seed``. The history
    holds the full-data loss after each epoch.
    """
    _check_loss(net, cfg.loss)
    X = _as_batch(net, X)
    Y = _targets(Y, X.shape[0])
    if X.shape[0] == 0:
        raise ValueError("no training rows")
    acts = [layer.activation for layer in net.layers]
    # LayerParams copies its arrays, so updating these in place leaves ``net`` alone
    work = Network(
        tuple(LayerParams(l.weights, l.bias, l.activation) for l in net.layers), net.input_dim
    )
    Ws = [layer.weights for layer in work.layers]
    bs = [layer.bias for layer in work.layers]

    rng = np.random.default_rng(cfg.seed)
    lr = cfg.learning_rate
    history = []
    n = X.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                grads, _ = _backprop(work, X[idx], Y[idx], cfg.loss)
                step = lr
                if cfg.clip_norm is not None:
                    norm = math.sqrt(sum(float(np.sum(dW**2) + np.sum(db**2)) for dW, db in grads))
                    if norm > cfg.clip_norm:
                        step = lr * cfg.clip_norm / norm
                for (dW, db), W, b in zip(grads, Ws, bs):
                    W -= step * dW
                    b -= step * db
            epoch_loss = loss_value(work, X, Y, cfg.loss)
            if not math.isfinite(epoch_loss) or not all(np.all(np.isfinite(W)) for W in Ws):
                raise TrainingError(epoch, epoch_loss)
            history.append(epoch_loss)
    trained = Network(
        tuple(LayerParams(W, b, a) for W, b, a in zip(Ws, bs, acts)), net.input_dim
    )
    return trained, history


def train(net: Network, d: Dataset, cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Train on a dataset.

    A classifier (one sigmoid output) learns the labels; any other network is
    trained to reconstruct the features.
    """
    if d.n_features != net.input_dim:
        raise ValueError(f"dataset has {d.n_features} features, network expects {net.input_dim}")
    targets = d.labels if net.is_classifier else d.features
    return fit_arrays(net, d.features, targets, cfg)


def predict_proba(net: Network, X) -> np.ndarray:
    if not net.is_classifier:
        raise ValueError("predict_proba needs a single sigmoid output")
    _, acts = _forward_cache(net, _as_batch(net, X))
    return acts[-1][:, 0]


def dump_network(net: Network, path: str | Path) -> None:
    """Plain-text dump: a size header, then per layer its activation, weights and bias.

    Weights are written row-major, one output unit per line.
    """
    lines = ["sizes " + " ".join(str(s) for s in net.sizes)]
    for layer in net.layers:
        lines.append(f"layer {layer.out_units} {layer.in_units} {layer.activation}")
        for row in layer.weights:
            lines.append(" ".join(repr(float(v)) for v in row))
        lines.append(" ".join(repr(float(v)) for v in layer.bias))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_network(path: str | Path) -> Network:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split()
    if header[0] != "sizes":
        raise ValueError("not a network dump: missing 'sizes' header")
    sizes = [int(s) for s in header[1:]]
    pos = 1
    layers = []
    for _ in range(len(sizes) - 1):
        _, out_units, in_units, act = lines[pos].split()
        out_units, in_units = int(out_units), int(in_units)
        W = np.array([[float(v) for v in lines[pos + 1 + r].split()] for r in range(out_units)])
        b = np.array([float(v) for v in lines[pos + 1 + out_units].split()])
        layers.append(LayerParams(W.reshape(out_units, in_units), b, act))
        pos += out_units + 2
    return Network(tuple(layers), sizes[0])
