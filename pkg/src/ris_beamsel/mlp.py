"""From-scratch multilayer perceptron for codeword classification.

Architecture: input -> three hidden blocks -> softmax output. Each hidden
block is affine -> batch normalization -> LeakyReLU; the output layer is
affine -> softmax over the codebook indices. Training is mini-batch
gradient descent with Adam, cross-entropy loss on one-hot labels, and
early stopping on validation loss. Everything runs in float64 numpy.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .rng import substream, DOMAIN_TRAINING

_MODEL_MAGIC = b"RISM"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class MlpArchitecture:
    """Layer widths [input, hidden..., output] plus activation/norm knobs.

    The production classifier uses exactly three hidden layers (see
    :func:`architecture_for`); the machinery itself accepts any number so
    small diagnostic nets stay cheap.
    """

    layer_widths: tuple
    leaky_slope: float = 0.01
    batchnorm_epsilon: float = 1e-5
    batchnorm_momentum: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if len(self.layer_widths) < 3:
            raise ValueError("architecture needs at least one hidden layer")
        if any(w < 1 for w in self.layer_widths):
            raise ValueError("layer widths must be >= 1")
        if not 0.0 < self.batchnorm_momentum < 1.0:
            raise ValueError("batchnorm_momentum must lie in (0, 1)")

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    @property
    def n_classes(self) -> int:
        return self.layer_widths[-1]

    @property
    def n_hidden(self) -> int:
        return len(self.layer_widths) - 2


def architecture_for(input_width: int, n_classes: int, **kwargs) -> MlpArchitecture:
    """Production shape: three hidden layers halving the width per layer."""
    widths = (
        input_width,
        int(round(input_width / 2)),
        int(round(input_width / 4)),
        int(round(input_width / 8)),
        n_classes,
    )
    return MlpArchitecture(layer_widths=widths, **kwargs)


@dataclass(frozen=True)
class TrainingConfig:
    batch_size: int = 2000
    learning_rate: float = 5e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    max_epochs: int = 12
    early_stop_patience: int = 2
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in (0, 1)")


@dataclass
class MlpModel:
    """Parameters, batch-norm state, and the feature/label bindings.

    ``weights``/``biases`` hold the four affine layers in order;
    ``bn_*`` lists hold one entry per hidden layer. ``feature_scale`` is
    the global input scale measured at training time;
    ``label_layout_hash`` pins the codebook layout the labels refer to.
    """

    arch: MlpArchitecture
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)
    bn_gain: list = field(default_factory=list)
    bn_shift: list = field(default_factory=list)
    bn_mean: list = field(default_factory=list)
    bn_var: list = field(default_factory=list)
    feature_scale: float = 1.0
    label_layout_hash: int = 0


def init_model(
    arch: MlpArchitecture,
    rng: np.random.Generator,
    feature_scale: float = 1.0,
    label_layout_hash: int = 0,
) -> MlpModel:
    """Fresh model: He-style weights scaled for the leaky slope, zero biases."""
    model = MlpModel(arch=arch, feature_scale=feature_scale, label_layout_hash=label_layout_hash)
    widths = arch.layer_widths
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        std = np.sqrt(2.0 / (fan_in * (1.0 + arch.leaky_slope**2)))
        model.weights.append(std * rng.standard_normal((fan_in, fan_out)))
        model.biases.append(np.zeros(fan_out))
    for width in widths[1:-1]:
        model.bn_gain.append(np.ones(width))
        model.bn_shift.append(np.zeros(width))
        model.bn_mean.append(np.zeros(width))
        model.bn_var.append(np.ones(width))
    return model


def one_hot(label: int, n_classes: int) -> np.ndarray:
    if not 0 <= label < n_classes:
        raise ValueError(f"label {label} out of range for {n_classes} classes")
    vec = np.zeros(n_classes)
    vec[label] = 1.0
    return vec


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def forward(model: MlpModel, batch: np.ndarray, mode: str = "infer"):
    """Class probabilities for a batch, rows summing to 1.

    ``mode='train'`` normalizes with the batch's own statistics and
    returns (probs, cache) with everything backward() needs; infer mode
    uses the stored running statistics and returns (probs, None). The
    function never mutates the model; the training loop folds the cached
    batch statistics into the running ones.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode {mode!r}")
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.arch.input_width:
        raise ValueError(
            f"batch shape {batch.shape} does not match input width {model.arch.input_width}"
        )
    eps = model.arch.batchnorm_epsilon
    slope = model.arch.leaky_slope
    train = mode == "train"
    cache = {"inputs": [], "xhat": [], "mu": [], "var": [], "bn_out": []} if train else None

    a = batch
    n_hidden = model.arch.n_hidden
    for layer in range(n_hidden):
        z = a @ model.weights[layer] + model.biases[layer]
        if train:
            mu = z.mean(axis=0)
            var = z.var(axis=0)
        else:
            mu = model.bn_mean[layer]
            var = model.bn_var[layer]
        xhat = (z - mu) / np.sqrt(var + eps)
        y = model.bn_gain[layer] * xhat + model.bn_shift[layer]
        out = np.where(y >= 0, y, slope * y)
        if train:
            cache["inputs"].append(a)
            cache["xhat"].append(xhat)
            cache["mu"].append(mu)
            cache["var"].append(var)
            cache["bn_out"].append(y)
        a = out
    logits = a @ model.weights[n_hidden] + model.biases[n_hidden]
    probs = _softmax(logits)
    if train:
        cache["last_hidden"] = a
        cache["probs"] = probs
        return probs, cache
    return probs, None


def cross_entropy(probs: np.ndarray, targets: np.ndarray, floor: float = 1e-12) -> float:
    """Mean negative log-likelihood of one-hot targets.

    Predicted probabilities are floored to keep the log finite when a
    class underflows to zero.
    """
    safe = np.maximum(probs, floor)
    return float(-np.sum(targets * np.log(safe)) / probs.shape[0])


def backward(model: MlpModel, cache: dict, targets: np.ndarray) -> dict:
    """Exact gradients of cross_entropy(forward(...)) for every parameter.

    Batch-norm backprop includes the terms from differentiating the batch
    mean and variance. Returns {'weights': [...], 'biases': [...],
    'bn_gain': [...], 'bn_shift': [...]} matching the model layout.
    """
    batch_size = targets.shape[0]
    eps = model.arch.batchnorm_epsilon
    slope = model.arch.leaky_slope
    n_hidden = model.arch.n_hidden
    grads = {
        "weights": [None] * (n_hidden + 1),
        "biases": [None] * (n_hidden + 1),
        "bn_gain": [None] * n_hidden,
        "bn_shift": [None] * n_hidden,
    }

    dlogits = (cache["probs"] - targets) / batch_size
    grads["weights"][n_hidden] = cache["last_hidden"].T @ dlogits
    grads["biases"][n_hidden] = dlogits.sum(axis=0)
    da = dlogits @ model.weights[n_hidden].T

    for layer in reversed(range(n_hidden)):
        y = cache["bn_out"][layer]
        dy = da * np.where(y >= 0, 1.0, slope)
        xhat = cache["xhat"][layer]
        grads["bn_gain"][layer] = (dy * xhat).sum(axis=0)
        grads["bn_shift"][layer] = dy.sum(axis=0)
        dxhat = dy * model.bn_gain[layer]
        inv_std = 1.0 / np.sqrt(cache["var"][layer] + eps)
        # mean/variance terms of the batch-norm chain rule
        dz = (inv_std / batch_size) * (
            batch_size * dxhat
            - dxhat.sum(axis=0)
            - xhat * (dxhat * xhat).sum(axis=0)
        )
        grads["weights"][layer] = cache["inputs"][layer].T @ dz
        grads["biases"][layer] = dz.sum(axis=0)
        da = dz @ model.weights[layer].T
    return grads


@dataclass
class AdamState:
    """First/second moment accumulators mirroring the gradient layout."""

    m: dict
    v: dict

    @classmethod
    def for_model(cls, model: MlpModel) -> "AdamState":
        def zeros_like_group(group):
            return [np.zeros_like(p) for p in group]

        template = {
            "weights": model.weights,
            "biases": model.biases,
            "bn_gain": model.bn_gain,
            "bn_shift": model.bn_shift,
        }
        return cls(
            m={k: zeros_like_group(g) for k, g in template.items()},
            v={k: zeros_like_group(g) for k, g in template.items()},
        )


def adam_step(
    model: MlpModel,
    grads: dict,
    state: AdamState,
    step_index: int,
    cfg: TrainingConfig,
) -> MlpModel:
    """One bias-corrected Adam update, applied in place."""
    if step_index < 1:
        raise ValueError("step_index starts at 1")
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon
    corr1 = 1.0 - b1**step_index
    corr2 = 1.0 - b2**step_index
    params = {
        "weights": model.weights,
        "biases": model.biases,
        "bn_gain": model.bn_gain,
        "bn_shift": model.bn_shift,
    }
    for group, plist in params.items():
        for i, grad in enumerate(grads[group]):
            m = state.m[group][i]
            v = state.v[group][i]
            m += (1.0 - b1) * (grad - m)
            v += (1.0 - b2) * (grad * grad - v)
            plist[i] -= cfg.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + eps)
    return model


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainingLog:
    epochs: list = field(default_factory=list)
    best_epoch: int = -1


class EarlyStopper:
    """Stop after ``patience`` consecutive epochs without a better val loss."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = -1
        self.stale = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record an epoch; True means training should stop now."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.stale = 0
            return False
        self.stale += 1
        return self.stale >= self.patience


def _snapshot(model: MlpModel) -> dict:
    return {
        "weights": [w.copy() for w in model.weights],
        "biases": [b.copy() for b in model.biases],
        "bn_gain": [g.copy() for g in model.bn_gain],
        "bn_shift": [s.copy() for s in model.bn_shift],
        "bn_mean": [m.copy() for m in model.bn_mean],
        "bn_var": [v.copy() for v in model.bn_var],
    }


def _restore(model: MlpModel, snap: dict) -> None:
    model.weights = [w.copy() for w in snap["weights"]]
    model.biases = [b.copy() for b in snap["biases"]]
    model.bn_gain = [g.copy() for g in snap["bn_gain"]]
    model.bn_shift = [s.copy() for s in snap["bn_shift"]]
    model.bn_mean = [m.copy() for m in snap["bn_mean"]]
    model.bn_var = [v.copy() for v in snap["bn_var"]]


def _eval_in_chunks(model: MlpModel, features, labels, scale: float, chunk: int = 8192):
    total_loss = 0.0
    correct = 0
    n = len(labels)
    for start in range(0, n, chunk):
        x = np.asarray(features[start : start + chunk], dtype=np.float64) * scale
        y = labels[start : start + chunk]
        probs, _ = forward(model, x, mode="infer")
        onehot = np.zeros_like(probs)
        onehot[np.arange(len(y)), y] = 1.0
        total_loss += cross_entropy(probs, onehot) * len(y)
        correct += int(np.count_nonzero(probs.argmax(axis=1) == y))
    return total_loss / n, correct / n


def train(
    model: MlpModel,
    features: np.ndarray,
    labels: np.ndarray,
    cfg: TrainingConfig,
) -> TrainingLog:
    """Train in place on raw (unscaled) features; returns the epoch log.

    The model's ``feature_scale`` is applied to every batch. A validation
    split is carved off up front; mini-batches are reshuffled each epoch;
    running batch-norm statistics follow the configured momentum; the
    parameters of the best validation epoch are restored at the end.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if n == 0:
        raise ValueError("training dataset is empty")
    if labels.min() < 0 or labels.max() >= model.arch.n_classes:
        raise ValueError("label out of range for the model's class count")

    rng = substream(cfg.seed, DOMAIN_TRAINING)
    perm = rng.permutation(n)
    n_val = max(1, int(round(n * cfg.validation_fraction)))
    if n_val >= n:
        raise ValueError("validation split leaves no training data")
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]

    state = AdamState.for_model(model)
    stopper = EarlyStopper(cfg.early_stop_patience)
    log = TrainingLog()
    momentum = model.arch.batchnorm_momentum
    n_classes = model.arch.n_classes
    step = 0
    best_snap = _snapshot(model)

    for epoch in range(cfg.max_epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        epoch_loss = 0.0
        epoch_correct = 0
        epoch_count = 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if len(idx) < 2:
                continue  # a single row has no batch variance
            x = np.asarray(features[idx], dtype=np.float64) * model.feature_scale
            y = labels[idx]
            targets = np.zeros((len(idx), n_classes))
            targets[np.arange(len(idx)), y] = 1.0

            probs, cache = forward(model, x, mode="train")
            loss = cross_entropy(probs, targets)
            grads = backward(model, cache, targets)
            step += 1
            adam_step(model, grads, state, step, cfg)
            for layer in range(model.arch.n_hidden):
                model.bn_mean[layer] = momentum * model.bn_mean[layer] + (1 - momentum) * cache["mu"][layer]
                model.bn_var[layer] = momentum * model.bn_var[layer] + (1 - momentum) * cache["var"][layer]

            epoch_loss += loss * len(idx)
            epoch_correct += int(np.count_nonzero(probs.argmax(axis=1) == y))
            epoch_count += len(idx)

        val_loss, val_acc = _eval_in_chunks(model, features[val_idx], labels[val_idx], model.feature_scale)
        log.epochs.append(
            EpochStats(
                epoch=epoch,
                train_loss=epoch_loss / max(epoch_count, 1),
                train_accuracy=epoch_correct / max(epoch_count, 1),
                val_loss=val_loss,
                val_accuracy=val_acc,
            )
        )
        improved = val_loss < stopper.best_loss
        should_stop = stopper.update(epoch, val_loss)
        if improved:
            best_snap = _snapshot(model)
        if should_stop:
            break

    _restore(model, best_snap)
    log.best_epoch = stopper.best_epoch
    return log


def predict_codeword(model: MlpModel, feature: np.ndarray):
    """Class label and probability vector for one raw feature vector.

    The model's stored feature scale is applied first; ties in the argmax
    resolve to the lowest index.
    """
    feature = np.asarray(feature, dtype=np.float64)
    if feature.ndim != 1 or feature.shape[0] != model.arch.input_width:
        raise ValueError(
            f"feature length {feature.shape} does not match input width {model.arch.input_width}"
        )
    probs, _ = forward(model, feature[np.newaxis, :] * model.feature_scale, mode="infer")
    return int(probs[0].argmax()), probs[0]


def predict_batch(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Labels for a batch of raw feature vectors."""
    x = np.asarray(features, dtype=np.float64) * model.feature_scale
    probs, _ = forward(model, x, mode="infer")
    return probs.argmax(axis=1)


def save_model(model: MlpModel, path) -> None:
    """Versioned binary dump: magic, architecture header, then tensors."""
    arch = model.arch
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(struct.pack("<H", _MODEL_VERSION))
        fh.write(struct.pack("<I", len(arch.layer_widths)))
        fh.write(struct.pack(f"<{len(arch.layer_widths)}I", *arch.layer_widths))
        fh.write(
            struct.pack(
                "<dddQ",
                arch.leaky_slope,
                arch.batchnorm_epsilon,
                arch.batchnorm_momentum,
                model.label_layout_hash,
            )
        )
        fh.write(struct.pack("<d", model.feature_scale))
        for group in (model.weights, model.biases, model.bn_gain, model.bn_shift, model.bn_mean, model.bn_var):
            for tensor in group:
                fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_model(path, expected_label_layout_hash: int | None = None) -> MlpModel:
    """Load a model dump; optionally verify it targets the right codebook."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MODEL_MAGIC:
        raise ValueError(f"{path}: not a model file (bad magic)")
    offset = 4
    (version,) = struct.unpack_from("<H", raw, offset)
    offset += 2
    if version != _MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {version}")
    (n_widths,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    widths = struct.unpack_from(f"<{n_widths}I", raw, offset)
    offset += 4 * n_widths
    slope, bn_eps, bn_mom, layout_hash = struct.unpack_from("<dddQ", raw, offset)
    offset += struct.calcsize("<dddQ")
    (feature_scale,) = struct.unpack_from("<d", raw, offset)
    offset += 8
    if expected_label_layout_hash is not None and layout_hash != expected_label_layout_hash:
        raise ValueError(
            f"{path}: model label layout {layout_hash:#x} does not match "
            f"expected {expected_label_layout_hash:#x}"
        )
    arch = MlpArchitecture(
        layer_widths=widths,
        leaky_slope=slope,
        batchnorm_epsilon=bn_eps,
        batchnorm_momentum=bn_mom,
    )
    model = MlpModel(arch=arch, feature_scale=feature_scale, label_layout_hash=layout_hash)

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += 8 * count
        return arr

    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        model.weights.append(take((fan_in, fan_out)))
    for _, fan_out in zip(widths[:-1], widths[1:]):
        model.biases.append(take((fan_out,)))
    for group in ("bn_gain", "bn_shift", "bn_mean", "bn_var"):
        for width in widths[1:-1]:
            getattr(model, group).append(take((width,)))
    if offset != len(raw):
        raise ValueError(f"{path}: trailing bytes after model payload")
    return model
