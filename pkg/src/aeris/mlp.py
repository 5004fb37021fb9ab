"""Feed-forward OP regressor: standardized inputs, ReLU hidden layers, linear output.

Trained with mini-batch Adam on the mean squared error, optionally with
decoupled weight decay and a cosine step-size schedule. The network
object is immutable in spirit; :func:`train` returns a new one.

Model file layout (``numpy.savez``, keys in this order):

``header``
    JSON object: ``format`` (``"aeris-mlp"``), ``version``, ``input_dim``,
    ``hidden_layers``, ``hidden_width``, ``output_dim``.
``mean``, ``scale``
    Input standardization, length ``input_dim``.
``W0, b0, W1, b1, ...``
    Row-major layer weights of shape ``(fan_in, fan_out)`` and biases.
"""

from __future__ import annotations

import json
import math
import zipfile
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dataset, DatasetSplit
from .distributions import RngHandle
from .errors import DomainError, ModelLoadError, ParameterError, ShapeError, TrainingError

__all__ = [
    "MlpArchitecture",
    "MlpNetwork",
    "TrainingConfig",
    "TrainingHistory",
    "init_network",
    "forward",
    "forward_raw",
    "predict",
    "predict_raw",
    "output_gradients",
    "loss_and_gradients",
    "train",
    "train_until_gate",
    "evaluate_rmse",
    "save_network",
    "load_network",
]

FORMAT_NAME = "aeris-mlp"
FORMAT_VERSION = 1
SCHEDULES = ("constant", "cosine")


@dataclass(frozen=True)
class MlpArchitecture:
    input_dim: int = 13
    hidden_layers: int = 5
    hidden_width: int = 128
    output_dim: int = 1

    def __post_init__(self):
        for name in ("input_dim", "hidden_layers", "hidden_width", "output_dim"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def layer_sizes(self):
        return [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]


@dataclass(eq=False)
class MlpNetwork:
    """Layer weights ``W[i]`` of shape ``(fan_in, fan_out)``, biases ``b[i]``,
    and the per-feature standardization ``(x - mean) / scale``."""

    architecture: MlpArchitecture
    weights: list
    biases: list
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        sizes = self.architecture.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("layer count does not match the architecture")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise ShapeError(f"layer {i} has shape {w.shape}/{b.shape}, expected {(sizes[i], sizes[i + 1])}")
        if self.mean.shape != (sizes[0],) or self.scale.shape != (sizes[0],):
            raise ShapeError("normalization statistics do not match the input dimension")

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            self.architecture,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.mean.copy(),
            self.scale.copy(),
        )

    def parameters(self):
        """Flat list ``[W0, b0, W1, b1, ...]`` (views, not copies)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def with_normalization(self, mean, scale) -> "MlpNetwork":
        net = self.copy()
        net.mean = np.asarray(mean, dtype=float).copy()
        net.scale = np.asarray(scale, dtype=float).copy()
        net.__post_init__()
        return net


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-3
    max_epochs: int = 100
    batch_size: int = 256
    rmse_threshold: float = 2e-2
    seed: int = 0
    # Adam moment decay rates and stabilizer
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    # decoupled L2 shrinkage applied to weight matrices only
    weight_decay: float = 0.0
    # "cosine" anneals the step size from learning_rate to zero over max_epochs
    schedule: str = "cosine"

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ParameterError("learning_rate must be positive")
        for name in ("max_epochs", "batch_size"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v!r}")
        if not self.rmse_threshold > 0.0:
            raise ParameterError("rmse_threshold must be positive")
        if not self.weight_decay >= 0.0:
            raise ParameterError("weight_decay must be non-negative")
        if self.schedule not in SCHEDULES:
            raise ParameterError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")


@dataclass
class TrainingHistory:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    best_epoch: int = -1
    converged: bool = False

    @property
    def epochs(self) -> int:
        return len(self.val_mse)

    @property
    def best_val_mse(self) -> float:
        return self.val_mse[self.best_epoch]

    def extend(self, other: "TrainingHistory") -> "TrainingHistory":
        """Concatenate a continuation run onto this one."""
        merged = TrainingHistory(self.train_mse + other.train_mse, self.val_mse + other.val_mse)
        merged.best_epoch = int(np.argmin(merged.val_mse))
        merged.converged = other.converged
        return merged


def init_network(arch: MlpArchitecture, seed: int) -> MlpNetwork:
    """He-normal weights ``N(0, 2 / fan_in)``, zero biases, identity normalization."""
    g = RngHandle(seed).generator
    sizes = arch.layer_sizes
    weights = [g.normal(0.0, math.sqrt(2.0 / sizes[i]), size=(sizes[i], sizes[i + 1])) for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return MlpNetwork(arch, weights, biases, np.zeros(arch.input_dim), np.ones(arch.input_dim))


def _as_batch(net, features):
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != net.architecture.input_dim:
        raise ShapeError(f"model expects {net.architecture.input_dim} features, got shape {np.shape(features)}")
    if not np.all(np.isfinite(x)):
        raise DomainError("features must be finite")
    return x, single


def _forward_cache(net, x):
    """Activations of every layer; ``acts[0]`` is the standardized input."""
    a = (x - net.mean) / net.scale
    acts = [a]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts


def predict_raw(net: MlpNetwork, features) -> np.ndarray:
    """Unclamped network output for a ``(rows, input_dim)`` batch, shape ``(rows,)``."""
    x, _ = _as_batch(net, features)
    return _forward_cache(net, x)[-1][:, 0]


def predict(net: MlpNetwork, features) -> np.ndarray:
    """Predicted OP for a batch, clamped to ``[0, 1]``."""
    return np.clip(predict_raw(net, features), 0.0, 1.0)


def forward_raw(net: MlpNetwork, features) -> float:
    x, single = _as_batch(net, features)
    if not single:
        raise ShapeError("forward takes one feature vector; use predict for batches")
    return float(_forward_cache(net, x)[-1][0, 0])


def forward(net: MlpNetwork, features) -> float:
    """Predicted OP for one feature vector, clamped to ``[0, 1]``."""
    return min(1.0, max(0.0, forward_raw(net, features)))


def _backward(net, acts, delta):
    """Gradients of ``sum(delta * output)`` w.r.t. ``[W0, b0, W1, b1, ...]``."""
    grads = [None] * (2 * len(net.weights))
    for i in range(len(net.weights) - 1, -1, -1):
        grads[2 * i] = acts[i].T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i:
            delta = (delta @ net.weights[i].T) * (acts[i] > 0.0)
    return grads


def output_gradients(net: MlpNetwork, features):
    """Gradient of the raw output w.r.t. every parameter, ordered like :meth:`MlpNetwork.parameters`."""
    x, single = _as_batch(net, features)
    if not single:
        raise ShapeError("output_gradients takes one feature vector")
    acts = _forward_cache(net, x)
    return _backward(net, acts, np.ones((1, 1)))


def loss_and_gradients(net: MlpNetwork, features, labels):
    """Mean squared error over a batch and its parameter gradients."""
    x, _ = _as_batch(net, features)
    y = np.asarray(labels, dtype=float).reshape(-1, 1)
    acts = _forward_cache(net, x)
    resid = acts[-1] - y
    loss = float(np.mean(resid**2))
    return loss, _backward(net, acts, 2.0 * resid / x.shape[0])


def _mse(net, data: Dataset) -> float:
    resid = _forward_cache(net, data.features)[-1][:, 0] - data.labels
    return float(np.mean(resid**2))


def _standardization(features):
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def train(net: MlpNetwork, split: DatasetSplit, cfg: TrainingConfig, *, normalize: bool = True):
    """Adam on the training MSE, keeping the weights with the lowest validation MSE.

    Standardization statistics are taken from ``split.train`` unless
    ``normalize`` is False (used when continuing an already trained net).
    With ``weight_decay`` each step first shrinks the weight matrices by
    ``1 - lr * weight_decay``; biases are never decayed, so a constant
    output survives in the last bias. The cosine schedule spans all
    ``max_epochs`` even when training stops early. Stops after ``cfg.max_epochs`` or once the validation RMSE drops to
    ``cfg.rmse_threshold``. Returns ``(trained, history)``.
    """
    train_set, val_set = split.train, split.validation
    if len(train_set) == 0 or len(val_set) == 0:
        raise ParameterError("training and validation sets must be non-empty")
    work = net.with_normalization(*_standardization(train_set.features)) if normalize else net.copy()
    params = work.parameters()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0
    history = TrainingHistory()
    best = work.copy()
    best_val = math.inf
    rng = RngHandle(cfg.seed)
    n = len(train_set)
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    total_steps = cfg.max_epochs * -(-n // cfg.batch_size)

    for epoch in range(cfg.max_epochs):
        order = rng.child(epoch).generator.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = loss_and_gradients(work, train_set.features[idx], train_set.labels[idx])
            if not math.isfinite(loss):
                raise TrainingError(f"loss became non-finite in epoch {epoch}", epoch)
            lr = cfg.learning_rate
            if cfg.schedule == "cosine":
                lr *= 0.5 * (1.0 + math.cos(math.pi * step / total_steps))
            step += 1
            c1 = 1.0 - b1**step
            c2 = 1.0 - b2**step
            if cfg.weight_decay:
                for w in work.weights:
                    w *= 1.0 - lr * cfg.weight_decay
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= b1
                mi += (1.0 - b1) * g
                vi *= b2
                vi += (1.0 - b2) * g * g
                p -= lr * (mi / c1) / (np.sqrt(vi / c2) + eps)
        tr = _mse(work, train_set)
        va = _mse(work, val_set)
        if not (math.isfinite(tr) and math.isfinite(va)):
            raise TrainingError(f"loss became non-finite in epoch {epoch}", epoch)
        history.train_mse.append(tr)
        history.val_mse.append(va)
        if va < best_val:
            best_val = va
            best = work.copy()
            history.best_epoch = epoch
        if math.sqrt(va) <= cfg.rmse_threshold:
            history.converged = True
            break
    return best, history


def evaluate_rmse(predictor, rows: Dataset) -> float:
    """Root mean squared error of clamped predictions over ``rows``.

    ``predictor`` is an :class:`MlpNetwork` or any callable mapping a
    feature batch to predictions.
    """
    if len(rows) == 0:
        raise ParameterError("evaluate_rmse needs at least one row")
    pred = predict(predictor, rows.features) if isinstance(predictor, MlpNetwork) else predictor(rows.features)
    resid = np.asarray(pred, dtype=float).reshape(-1) - rows.labels
    return float(np.sqrt(np.mean(resid**2)))


def train_until_gate(net: MlpNetwork, split: DatasetSplit, cfg: TrainingConfig, *, gate: float = 2e-2,
                     max_retries: int = 3):
    """Train, then retry while the held-out test RMSE is at or above ``gate``.

    Retries continue from the current weights; odd retries double the epoch
    budget and even ones halve the learning rate. Returns
    ``(net, history, test_rmse, attempts)``.
    """
    trained, history = train(net, split, cfg)
    rmse = evaluate_rmse(trained, split.test)
    attempts = 1
    while rmse >= gate and attempts <= max_retries:
        if attempts % 2:
            cfg = replace(cfg, max_epochs=cfg.max_epochs * 2, seed=cfg.seed + 1)
        else:
            cfg = replace(cfg, learning_rate=cfg.learning_rate / 2.0, seed=cfg.seed + 1)
        trained, more = train(trained, split, cfg, normalize=False)
        history = history.extend(more)
        rmse = evaluate_rmse(trained, split.test)
        attempts += 1
    return trained, history, rmse, attempts


def save_network(path, net: MlpNetwork) -> None:
    arch = net.architecture
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "input_dim": arch.input_dim,
        "hidden_layers": arch.hidden_layers,
        "hidden_width": arch.hidden_width,
        "output_dim": arch.output_dim,
    }
    arrays = {"header": np.array(json.dumps(header)), "mean": net.mean, "scale": net.scale}
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays[f"W{i}"] = w
        arrays[f"b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_network(path) -> MlpNetwork:
    """Read a model written by :func:`save_network`; any defect raises :class:`ModelLoadError`."""
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format") != FORMAT_NAME:
                raise ModelLoadError(f"not a model file (format {header.get('format')!r})")
            if header.get("version") != FORMAT_VERSION:
                raise ModelLoadError(f"unsupported model version {header.get('version')!r}")
            arch = MlpArchitecture(header["input_dim"], header["hidden_layers"],
                                   header["hidden_width"], header["output_dim"])
            n_layers = arch.hidden_layers + 1
            weights = [np.array(data[f"W{i}"], dtype=float) for i in range(n_layers)]
            biases = [np.array(data[f"b{i}"], dtype=float) for i in range(n_layers)]
            return MlpNetwork(arch, weights, biases, np.array(data["mean"], dtype=float),
                              np.array(data["scale"], dtype=float))
    except ModelLoadError:
        raise
    except (OSError, ValueError, KeyError, TypeError, EOFError, zipfile.BadZipFile, ShapeError, ParameterError) as exc:
        raise ModelLoadError(f"cannot load model from {path}: {exc}") from exc
