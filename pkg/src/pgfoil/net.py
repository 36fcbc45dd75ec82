"""Dense feed-forward network with mid-network feature injection.

The distinguishing mechanism: after the activation of one chosen hidden
layer, an external feature vector is concatenated with that layer's
latent variables, and the following layer consumes the widened vector.
The injected features are constants of each sample; they receive no
gradient.  With injected_width = 0 the model reduces exactly to a plain
multilayer perceptron.

Everything here is plain numpy in float64, single-threaded per model,
and deterministic given the seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ShapeError

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8

MODEL_FORMAT = "pgfoil-model 1"


def _tanh(z):
    return np.tanh(z)


def _tanh_grad(z, a):
    return 1.0 - a**2


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z, a):
    return (z > 0.0).astype(float)


ACTIVATIONS = {"tanh": (_tanh, _tanh_grad), "relu": (_relu, _relu_grad)}


@dataclass(frozen=True)
class InjectionSpec:
    """Where extra features enter the network.

    layer_index is 1-based: the injected vector is concatenated after
    that hidden layer's activation.
    """

    layer_index: int = 3
    injected_width: int = 2

    def __post_init__(self):
        if self.layer_index < 1:
            raise ValueError(f"layer_index must be >= 1, got {self.layer_index}")
        if self.injected_width < 0:
            raise ValueError(
                f"injected_width must be >= 0, got {self.injected_width}"
            )


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture: layer widths, injection point, activation."""

    input_width: int
    hidden_widths: tuple = (20, 20, 20, 20)
    output_width: int = 1
    injection: InjectionSpec = field(default_factory=InjectionSpec)
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))
        if self.input_width < 1 or self.output_width < 1:
            raise ValueError("input and output widths must be positive")
        if not self.hidden_widths or any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"bad hidden widths {self.hidden_widths}")
        if self.injection.layer_index > len(self.hidden_widths):
            raise ValueError(
                f"injection layer {self.injection.layer_index} exceeds "
                f"hidden layer count {len(self.hidden_widths)}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def layer_dims(self):
        """(fan_in, fan_out) of every weight matrix, hidden layers then output."""
        dims = []
        width = self.input_width
        for i, hidden in enumerate(self.hidden_widths, start=1):
            dims.append((width, hidden))
            width = self.concatenated_width(i)
        dims.append((width, self.output_width))
        return dims

    def concatenated_width(self, layer_index: int) -> int:
        """Width leaving hidden layer layer_index, injection included."""
        width = self.hidden_widths[layer_index - 1]
        if layer_index == self.injection.layer_index:
            width += self.injection.injected_width
        return width


@dataclass
class Network:
    """A NetworkSpec plus its parameters; treated as immutable."""

    spec: NetworkSpec
    weights: list  # [np.ndarray (fan_in, fan_out), ...]
    biases: list   # [np.ndarray (fan_out,), ...]

    @property
    def input_width(self):
        return self.spec.input_width

    @property
    def hidden_widths(self):
        return self.spec.hidden_widths

    @property
    def output_width(self):
        return self.spec.output_width

    @property
    def injection(self):
        return self.spec.injection

    @property
    def activation(self):
        return self.spec.activation

    @property
    def n_parameters(self):
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 500
    batch_size: int = 64
    seed: int = 0
    early_stopping_patience: int | None = None
    validation_fraction: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must be in [0, 1), got {self.validation_fraction}"
            )
        if self.early_stopping_patience is not None and self.early_stopping_patience < 1:
            raise ValueError("early_stopping_patience must be positive when set")


@dataclass
class LossHistory:
    train: list
    validation: list
    best_epoch: int | None = None


def glorot_init(spec: NetworkSpec, seed: int) -> Network:
    """Glorot-uniform weights, zero biases, from a seeded generator.

    Each matrix is drawn uniformly within +-sqrt(6 / (fan_in + fan_out));
    identical seeds reproduce identical parameters bit for bit.
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_dims():
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Network(spec, weights, biases)


def _as_batch(arr, width, what):
    arr = np.asarray(arr, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :] if arr.size else arr.reshape(1, 0)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ShapeError(
            f"{what} expects width {width}, got shape {arr.shape}"
        )
    return arr, single


def _coerce_inputs(network, features, injected):
    spec = network.spec
    x, single = _as_batch(features, spec.input_width, "input layer")
    inj_width = spec.injection.injected_width
    if injected is None:
        injected = np.zeros((x.shape[0], 0))
    injected, _ = _as_batch(
        np.asarray(injected, dtype=float),
        inj_width,
        f"injection at hidden layer {spec.injection.layer_index}",
    )
    if injected.shape[0] != x.shape[0]:
        raise ShapeError(
            f"batch mismatch: {x.shape[0]} feature rows vs "
            f"{injected.shape[0]} injected rows"
        )
    return x, injected, single


def _forward_trace(network, x, injected):
    """Run the network, keeping pre-activations and layer inputs for backprop."""
    act, _ = ACTIVATIONS[network.spec.activation]
    inj_layer = network.spec.injection.layer_index
    n_hidden = len(network.spec.hidden_widths)
    inputs = []       # input consumed by each weight matrix
    pre = []          # pre-activation of each hidden layer
    acts = []         # activation before any concatenation
    h = x
    for i in range(n_hidden):
        inputs.append(h)
        z = h @ network.weights[i] + network.biases[i]
        pre.append(z)
        h = act(z)
        acts.append(h)
        if i + 1 == inj_layer:
            h = np.concatenate([h, injected], axis=1)
    inputs.append(h)
    out = h @ network.weights[-1] + network.biases[-1]
    return inputs, pre, acts, out


def forward(network: Network, geometry_features, injected=None) -> np.ndarray:
    """Predict; returns (batch, output_width), or (output_width,) for 1-D input."""
    x, inj, single = _coerce_inputs(network, geometry_features, injected)
    _, _, _, out = _forward_trace(network, x, inj)
    return out[0] if single else out


def loss(predictions, targets) -> float:
    """Mean squared error over samples."""
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(targets, dtype=float).ravel()
    if p.size == 0:
        raise ValueError("loss needs at least one sample")
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} targets")
    return float(np.mean((p - t) ** 2))


def backward(network: Network, geometry_features, injected, targets):
    """Mean-squared-error loss and its exact gradient w.r.t. all parameters.

    The concatenation at the injection layer is split during the
    backward pass; the injected features are constants and get no
    gradient.  Returns (loss, grad_weights, grad_biases).
    """
    x, inj, _ = _coerce_inputs(network, geometry_features, injected)
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if t.shape != (x.shape[0], network.spec.output_width):
        raise ShapeError(
            f"targets expect shape ({x.shape[0]}, {network.spec.output_width}), "
            f"got {t.shape}"
        )
    inputs, pre, acts, out = _forward_trace(network, x, inj)
    batch = x.shape[0]
    residual = out - t
    loss_value = float(np.sum(residual**2) / batch)

    _, act_grad = ACTIVATIONS[network.spec.activation]
    inj_layer = network.spec.injection.layer_index
    n_hidden = len(network.spec.hidden_widths)
    grad_w = [None] * len(network.weights)
    grad_b = [None] * len(network.biases)

    delta = 2.0 * residual / batch  # d loss / d output
    grad_w[-1] = inputs[-1].T @ delta
    grad_b[-1] = delta.sum(axis=0)
    upstream = delta @ network.weights[-1].T
    for i in range(n_hidden - 1, -1, -1):
        if i + 1 == inj_layer:
            upstream = upstream[:, : network.spec.hidden_widths[i]]
        dz = upstream * act_grad(pre[i], acts[i])
        grad_w[i] = inputs[i].T @ dz
        grad_b[i] = dz.sum(axis=0)
        if i > 0:
            upstream = dz @ network.weights[i].T
    return loss_value, grad_w, grad_b


def train(network: Network, geometry_features, injected, targets, config: TrainConfig):
    """Mini-batch Adam on mean squared error; returns (trained net, history).

    Deterministic for a fixed (network, data, config): seeded shuffling
    and single-threaded accumulation.  When early_stopping_patience is
    set, training stops once the monitored loss (validation when a
    split exists, else training) fails to improve for that many epochs,
    and the best parameters are restored.
    """
    x, inj, _ = _coerce_inputs(network, geometry_features, injected)
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    n = x.shape[0]
    if t.shape[0] != n:
        raise ValueError(f"targets length {t.shape[0]} does not match {n} samples")

    rng = np.random.default_rng(config.seed)
    n_val = int(round(config.validation_fraction * n))
    if n_val > 0:
        order = rng.permutation(n)
        val_idx, train_idx = order[:n_val], order[n_val:]
    else:
        val_idx, train_idx = np.empty(0, dtype=int), np.arange(n)
    n_train = len(train_idx)
    if n_train == 0:
        raise ValueError("validation split leaves no training samples")
    if config.batch_size > n_train:
        raise ValueError(
            f"batch_size {config.batch_size} exceeds training set size {n_train}"
        )
    x_tr, inj_tr, t_tr = x[train_idx], inj[train_idx], t[train_idx]
    x_va, inj_va, t_va = x[val_idx], inj[val_idx], t[val_idx]

    weights = [w.copy() for w in network.weights]
    biases = [b.copy() for b in network.biases]
    model = Network(network.spec, weights, biases)
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    history = LossHistory(train=[], validation=[])
    best = math.inf
    best_params = None
    best_epoch = None
    stale = 0
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n_train)
        sse = 0.0
        for start in range(0, n_train, config.batch_size):
            idx = order[start : start + config.batch_size]
            batch_loss, grad_w, grad_b = backward(model, x_tr[idx], inj_tr[idx], t_tr[idx])
            sse += batch_loss * len(idx)
            step += 1
            scale = (
                config.learning_rate
                * math.sqrt(1.0 - _ADAM_BETA2**step)
                / (1.0 - _ADAM_BETA1**step)
            )
            for k in range(len(weights)):
                m_w[k] = _ADAM_BETA1 * m_w[k] + (1.0 - _ADAM_BETA1) * grad_w[k]
                v_w[k] = _ADAM_BETA2 * v_w[k] + (1.0 - _ADAM_BETA2) * grad_w[k] ** 2
                weights[k] -= scale * m_w[k] / (np.sqrt(v_w[k]) + _ADAM_EPS)
                m_b[k] = _ADAM_BETA1 * m_b[k] + (1.0 - _ADAM_BETA1) * grad_b[k]
                v_b[k] = _ADAM_BETA2 * v_b[k] + (1.0 - _ADAM_BETA2) * grad_b[k] ** 2
                biases[k] -= scale * m_b[k] / (np.sqrt(v_b[k]) + _ADAM_EPS)
        epoch_loss = sse / n_train
        history.train.append(epoch_loss)
        if not math.isfinite(epoch_loss):
            raise DivergenceError("training loss is not finite", epoch=epoch)

        monitored = epoch_loss
        if n_val > 0:
            val_loss = loss(forward(model, x_va, inj_va), t_va)
            history.validation.append(val_loss)
            monitored = val_loss
        if config.early_stopping_patience is not None:
            if monitored < best:
                best = monitored
                best_epoch = epoch
                best_params = ([w.copy() for w in weights], [b.copy() for b in biases])
                stale = 0
            else:
                stale += 1
                if stale >= config.early_stopping_patience:
                    break

    if best_params is not None:
        weights, biases = best_params
        history.best_epoch = best_epoch
    return Network(network.spec, weights, biases), history


def _format_vector(values):
    return " ".join(f"{v:.17g}" for v in values)


def dumps_model(network: Network) -> str:
    """Self-describing text serialization; round-trips exactly."""
    spec = network.spec
    lines = [
        MODEL_FORMAT,
        f"activation {spec.activation}",
        f"input_width {spec.input_width}",
        "hidden_widths " + " ".join(str(w) for w in spec.hidden_widths),
        f"output_width {spec.output_width}",
        f"injection_layer {spec.injection.layer_index}",
        f"injection_width {spec.injection.injected_width}",
    ]
    for i, (w, b) in enumerate(zip(network.weights, network.biases), start=1):
        lines.append(f"W{i} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(_format_vector(row))
        lines.append(f"b{i} {b.shape[0]}")
        lines.append(_format_vector(b))
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> Network:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT!r} file")
    header = {}
    pos = 1
    for _ in range(6):
        key, _, value = lines[pos].partition(" ")
        header[key] = value.strip()
        pos += 1
    spec = NetworkSpec(
        input_width=int(header["input_width"]),
        hidden_widths=tuple(int(w) for w in header["hidden_widths"].split()),
        output_width=int(header["output_width"]),
        injection=InjectionSpec(
            layer_index=int(header["injection_layer"]),
            injected_width=int(header["injection_width"]),
        ),
        activation=header["activation"],
    )
    weights, biases = [], []
    n_layers = len(spec.hidden_widths) + 1
    for i in range(1, n_layers + 1):
        tag, rows, cols = lines[pos].split()
        if tag != f"W{i}":
            raise ValueError(f"expected W{i} block, found {tag!r}")
        rows, cols = int(rows), int(cols)
        pos += 1
        w = np.array(
            [[float(v) for v in lines[pos + r].split()] for r in range(rows)]
        )
        if w.shape != (rows, cols):
            raise ValueError(f"W{i} block has shape {w.shape}, expected {(rows, cols)}")
        pos += rows
        tag, width = lines[pos].split()
        if tag != f"b{i}":
            raise ValueError(f"expected b{i} block, found {tag!r}")
        pos += 1
        b = np.array([float(v) for v in lines[pos].split()])
        if b.shape != (int(width),):
            raise ValueError(f"b{i} block has {b.size} values, expected {width}")
        pos += 1
        weights.append(w)
        biases.append(b)
    expected = spec.layer_dims()
    for i, (w, dims) in enumerate(zip(weights, expected), start=1):
        if w.shape != dims:
            raise ValueError(f"W{i} shape {w.shape} does not match spec {dims}")
    return Network(spec, weights, biases)


def save_model(network: Network, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(network))


def load_model(path) -> Network:
    with open(path) as fh:
        return loads_model(fh.read())
