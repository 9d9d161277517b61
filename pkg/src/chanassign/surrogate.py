"""Learned surrogate for the assignment solver.

The gain-matrix-to-label mapping is treated as regression: small tanh MLPs
are trained from scratch with mini-batch MSE, three bases with different
hidden widths are stacked through a top model fitted on held-out validation
predictions, and real-valued outputs are turned back into feasible label
vectors by ranking (user with ascending rank rho gets subchannel
ceil(rho/A), so any monotone distortion of the outputs is harmless).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (DataFormatError, DecodingError, DimensionError,
                     EncodingError, ParameterError, TrainingError)


# ---------------------------------------------------------------------------
# label codecs


def encode_labels(assignment):
    """Label vector of a 0/1 assignment: entry i is the subchannel (1-based)
    of user i. Accepts a single (M, N) matrix or a (K, M, N) batch."""
    x = np.asarray(assignment)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise EncodingError(f"expected an (M, N) matrix, got shape {x.shape}")
    if not np.isin(x, (0, 1)).all():
        raise EncodingError("assignment entries must be 0 or 1")
    if not (x.sum(axis=2) == 1).all():
        raise EncodingError("every user must occupy exactly one subchannel")
    labels = x.argmax(axis=2) + 1
    return labels[0] if single else labels


def decode_labels(labels, dims):
    """Inverse of `encode_labels`; validates the per-subchannel quota."""
    m, n, a = dims
    lab = np.asarray(labels, dtype=np.int64)
    single = lab.ndim == 1
    if single:
        lab = lab[None]
    if lab.shape[1] != m:
        raise DecodingError(f"label vector length {lab.shape[1]} != {m}")
    if lab.min() < 1 or lab.max() > n:
        raise DecodingError("labels must lie in 1..N")
    counts = (lab[:, :, None] == np.arange(1, n + 1)).sum(axis=1)
    if not (counts == a).all():
        raise DecodingError(f"every subchannel index must appear exactly {a} times")
    eye = np.eye(n, dtype=np.int8)
    out = eye[lab - 1]
    return out[0] if single else out


def permutation_decode(raw, dims):
    """Feasible label vector from real-valued outputs by ranking.

    Values are ranked ascending (ties to the lowest index); the user with
    rank rho gets subchannel ceil(rho/A). Feasible integer labels come back
    unchanged.
    """
    m, n, a = dims
    v = np.asarray(raw, dtype=float)
    single = v.ndim == 1
    if single:
        v = v[None]
    if v.shape[1] != m:
        raise DimensionError(f"output length {v.shape[1]} != {m}")
    order = np.argsort(v, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(m)[None, :], axis=1)
    labels = ranks // a + 1
    return labels[0] if single else labels


def accuracy(preds, targets):
    """Fraction of label positions predicted exactly."""
    p = np.asarray(preds)
    t = np.asarray(targets)
    if p.shape != t.shape:
        raise DimensionError(f"shape mismatch: {p.shape} vs {t.shape}")
    return float((p == t).mean())


# ---------------------------------------------------------------------------
# MLP


@dataclass
class MlpModel:
    """Fully connected net: tanh hidden layers, identity output."""

    layer_sizes: list
    weights: list  # (fan_in, fan_out) per layer
    biases: list  # (fan_out,) per layer

    def copy(self):
        return MlpModel(layer_sizes=list(self.layer_sizes),
                        weights=[w.copy() for w in self.weights],
                        biases=[b.copy() for b in self.biases])


def init_mlp(layer_sizes, seed):
    """Glorot-uniform initialized MLP."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(layer_sizes=list(layer_sizes), weights=weights, biases=biases)


def _forward_all(model, x):
    """Activations of every layer; last one is the linear output."""
    acts = [x]
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(z if k == last else np.tanh(z))
    return acts


def mlp_forward(model, x):
    """Network output for a feature vector or a batch of rows."""
    v = np.asarray(x, dtype=float)
    single = v.ndim == 1
    if single:
        v = v[None]
    if v.shape[1] != model.layer_sizes[0]:
        raise DimensionError(
            f"feature length {v.shape[1]} != input size {model.layer_sizes[0]}")
    out = _forward_all(model, v)[-1]
    return out[0] if single else out


def mlp_loss(model, x, y):
    """Mean squared error over all outputs of the batch."""
    pred = mlp_forward(model, x)
    return float(((pred - np.asarray(y)) ** 2).mean())


def mlp_gradient(model, x, y):
    """Exact MSE gradients by reverse accumulation.

    Returns (weight grads, bias grads, loss).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != model.layer_sizes[-1] or y.shape[0] != x.shape[0]:
        raise DimensionError(f"target shape {y.shape} does not match")
    acts = _forward_all(model, x)
    pred = acts[-1]
    loss = float(((pred - y) ** 2).mean())
    delta = 2.0 * (pred - y) / pred.size
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for k in range(len(model.weights) - 1, -1, -1):
        grads_w[k] = acts[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k].T) * (1.0 - acts[k] ** 2)
    return grads_w, grads_b, loss


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainConfig:
    epochs: int = 60
    batch_size: int = 200
    learning_rate: float = 1e-3  # adam
    sgd_learning_rate: float = 1e-2
    optimizer: str = "customize_switch"  # adam | sgd_momentum | customize_switch
    switch_epoch: int | None = None  # default: epochs // 2
    momentum: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("epochs and batch_size must be positive")
        if min(self.learning_rate, self.sgd_learning_rate) <= 0:
            raise ParameterError("learning rates must be positive")
        if self.optimizer not in ("adam", "sgd_momentum", "customize_switch"):
            raise ParameterError(f"unknown optimizer {self.optimizer!r}")
        switch = self.resolved_switch_epoch()
        if not 1 <= switch <= self.epochs:
            raise ParameterError("switch_epoch must lie in [1, epochs]")

    def resolved_switch_epoch(self):
        return self.switch_epoch if self.switch_epoch is not None else max(
            1, self.epochs // 2)


class _Adam:
    def __init__(self, model, cfg):
        self.lr, self.b1, self.b2, self.eps = (cfg.learning_rate, cfg.adam_beta1,
                                               cfg.adam_beta2, cfg.adam_eps)
        self.m = [np.zeros_like(w) for w in model.weights + model.biases]
        self.v = [np.zeros_like(w) for w in model.weights + model.biases]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, (p, g) in enumerate(zip(params, grads)):
            self.m[k] = self.b1 * self.m[k] + (1.0 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1.0 - self.b2) * g * g
            p -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


class _SgdMomentum:
    def __init__(self, model, cfg):
        self.lr, self.mu = cfg.sgd_learning_rate, cfg.momentum
        self.vel = [np.zeros_like(w) for w in model.weights + model.biases]

    def step(self, params, grads):
        for k, (p, g) in enumerate(zip(params, grads)):
            self.vel[k] = self.mu * self.vel[k] - self.lr * g
            p += self.vel[k]


def train(model, features, targets, cfg=None):
    """Mini-batch training; returns (trained model, per-epoch loss history).

    ``customize_switch`` runs adam up to the switch epoch and a fresh
    momentum-SGD afterwards (optimizer state is not carried over).
    Deterministic for a fixed config seed.
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    x = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if len(x) == 0:
        raise ParameterError("training data is empty")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    switch = cfg.resolved_switch_epoch()

    if cfg.optimizer == "sgd_momentum":
        opt = _SgdMomentum(model, cfg)
    else:
        opt = _Adam(model, cfg)

    history = []
    for epoch in range(cfg.epochs):
        if cfg.optimizer == "customize_switch" and epoch == switch:
            opt = _SgdMomentum(model, cfg)
        perm = rng.permutation(len(x))
        losses = []
        for start in range(0, len(x), cfg.batch_size):
            sel = perm[start:start + cfg.batch_size]
            gw, gb, loss = mlp_gradient(model, x[sel], y[sel])
            if not np.isfinite(loss):
                raise TrainingError(
                    f"loss became non-finite in epoch {epoch}", history=history)
            opt.step(model.weights + model.biases, gw + gb)
            losses.append(loss)
        history.append(float(np.mean(losses)))
    return model, history


# ---------------------------------------------------------------------------
# feature pipeline and the stacked ensemble


@dataclass
class FeatureTransform:
    """Input scaling applied before every forward pass.

    ``log-zscore`` standardizes log10 gains -- the gain dynamic range spans
    many decades, which raw z-scores do not tame; ``zscore`` standardizes
    the raw gains.
    """

    kind: str  # "log-zscore" | "zscore"
    means: np.ndarray
    stds: np.ndarray

    def apply(self, features):
        v = np.asarray(features, dtype=float)
        if self.kind == "log-zscore":
            v = np.log10(v)
        return (v - self.means) / self.stds


def fit_feature_transform(features, kind="log-zscore"):
    if kind not in ("log-zscore", "zscore"):
        raise ParameterError(f"unknown feature transform {kind!r}")
    v = np.asarray(features, dtype=float)
    if kind == "log-zscore":
        v = np.log10(v)
    means = v.mean(axis=0)
    stds = v.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return FeatureTransform(kind=kind, means=means, stds=stds)


@dataclass
class EnsembleModel:
    """Stacked regressor: base MLPs plus a top MLP over their outputs."""

    dims: tuple
    base_models: list
    top_model: MlpModel
    transform: FeatureTransform
    target_offset: float  # scalar train-label mean subtracted from targets
    val_accuracy: dict = field(default_factory=dict)

    def __post_init__(self):
        m = self.dims[0]
        want = len(self.base_models) * m
        if self.top_model.layer_sizes[0] != want:
            raise DimensionError(
                f"top input width {self.top_model.layer_sizes[0]} != "
                f"bases*M = {want}")


def _base_outputs(bases, inputs):
    return np.concatenate([mlp_forward(b, inputs) for b in bases], axis=1)


def stack_train(bases, split, top_cfg=None, transform=None, top_hidden=(10, 10)):
    """Fit the top model on base predictions over the validation split.

    The bases are never refit here; they only run forward on validation
    features. Test data is not consulted.
    """
    if len(bases) < 2:
        raise ParameterError("stacking needs at least two base models")
    if len(split.validation) == 0:
        raise ParameterError("validation split is empty")
    m = split.validation.dims[0]
    top_cfg = top_cfg or TrainConfig()
    transform = transform or fit_feature_transform(split.train.features)
    target_offset = float(split.train.targets.mean())

    val_in = _base_outputs(bases, transform.apply(split.validation.features))
    val_y = split.validation.targets.astype(float) - target_offset
    top = init_mlp([len(bases) * m, *top_hidden, m],
                   seed=np.random.SeedSequence(entropy=top_cfg.seed,
                                               spawn_key=(len(bases),)))
    top, _ = train(top, val_in, val_y, top_cfg)
    return EnsembleModel(dims=split.validation.dims, base_models=list(bases),
                         top_model=top, transform=transform,
                         target_offset=target_offset)


def predict(ensemble, features):
    """Feasible label vectors for a gain matrix, a flat feature vector, or a
    batch of feature rows."""
    m, n, a = ensemble.dims
    v = np.asarray(features, dtype=float)
    if v.ndim == 2 and v.shape == (m, n):
        v = v.reshape(1, m * n)
        single = True
    else:
        single = v.ndim == 1
        v = np.atleast_2d(v)
    if v.shape[1] != m * n:
        raise DimensionError(f"feature width {v.shape[1]} != M*N = {m * n}")
    raw = mlp_forward(ensemble.top_model,
                      _base_outputs(ensemble.base_models, ensemble.transform.apply(v)))
    labels = permutation_decode(raw, ensemble.dims)
    return labels[0] if single else labels


TABLE_BASE_HIDDEN = ((10, 10, 10), (10, 10, 10, 10), (20, 20, 20))


def default_base_hidden(dims):
    """Three distinct base architectures sized to the task: width grows with
    the input so the bases neither underfit (4, 4, 1) nor waste time on
    (2, 2, 1)."""
    m, n, _ = dims
    w = int(np.clip(4 * m * n, 10, 96))
    return ((w, w, w), (w, w, w, w), (2 * w, 2 * w, 2 * w))


def augment_training_data(features, targets, dims, copies, seed):
    """Append ``copies`` user/subchannel-permuted replicas of the samples.

    The assignment problem is permutation-equivariant, so relabeled copies
    are exactly-optimal new samples; this multiplies the effective training
    set in the sample-starved desk-scale regime.
    """
    m, n, a = dims
    if copies < 1:
        return np.asarray(features), np.asarray(targets)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(0xA06,)))
    r = np.asarray(features).reshape(-1, m, n)
    targets = np.asarray(targets)
    feats, labs = [np.asarray(features)], [targets]
    for _ in range(copies):
        pu = rng.permutation(m)
        pc = rng.permutation(n)
        inv = np.empty(n, dtype=np.int64)
        inv[pc] = np.arange(n)
        feats.append(r[:, pu][:, :, pc].reshape(-1, m * n))
        labs.append(inv[targets[:, pu] - 1] + 1)
    return np.concatenate(feats), np.concatenate(labs)


def train_ensemble(split, base_cfg=None, top_cfg=None, seed=0,
                   base_hidden=None, transform_kind="log-zscore",
                   augment_copies=7):
    """Full pipeline: fit the bases on (augmented) train, stack on validation.

    Returns (ensemble, info) where info carries loss histories and
    per-model validation accuracy.
    """
    m, n, a = split.train.dims
    if base_hidden is None:
        base_hidden = default_base_hidden(split.train.dims)
    if base_cfg is None:
        # tuned for the augmented pipeline: fewer epochs over more replicas
        base_cfg = TrainConfig(epochs=40, learning_rate=3e-3)
    top_cfg = top_cfg or replace(base_cfg)
    x_aug, y_aug = augment_training_data(split.train.features,
                                         split.train.targets,
                                         split.train.dims, augment_copies, seed)
    transform = fit_feature_transform(x_aug, transform_kind)
    target_offset = float(y_aug.mean())
    x_train = transform.apply(x_aug)
    y_train = y_aug.astype(float) - target_offset

    bases, histories = [], []
    for k, hidden in enumerate(base_hidden):
        child = np.random.SeedSequence(entropy=seed, spawn_key=(k,))
        net = init_mlp([m * n, *hidden, m], seed=child)
        cfg_k = replace(base_cfg, seed=int(child.generate_state(1)[0]))
        net, hist = train(net, x_train, y_train, cfg_k)
        bases.append(net)
        histories.append(hist)

    top_cfg = replace(top_cfg, seed=int(
        np.random.SeedSequence(entropy=seed, spawn_key=(len(base_hidden),))
        .generate_state(1)[0]))
    ensemble = stack_train(bases, split, top_cfg, transform=transform)

    val_x = split.validation.features
    val_y = split.validation.targets
    val_acc = {}
    for k, base in enumerate(bases):
        raw = mlp_forward(base, transform.apply(val_x))
        val_acc[f"base{k + 1}"] = accuracy(permutation_decode(raw, split.train.dims),
                                           val_y)
    val_acc["top"] = accuracy(predict(ensemble, val_x), val_y)
    ensemble.val_accuracy = val_acc
    return ensemble, {"histories": histories, "val_accuracy": val_acc}


# ---------------------------------------------------------------------------
# model files


def _fmt(v):
    return repr(float(v))


def save_mlp(model, path):
    """Text format: header ``version,sizes,activation`` then per layer one
    line of row-major weights and one of biases."""
    sizes = "x".join(str(s) for s in model.layer_sizes)
    with open(path, "w") as fh:
        fh.write(f"1,{sizes},tanh\n")
        for w, b in zip(model.weights, model.biases):
            fh.write(",".join(_fmt(v) for v in w.ravel()) + "\n")
            fh.write(",".join(_fmt(v) for v in b) + "\n")


def load_mlp(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3 or header[0] != "1" or header[2] != "tanh":
            raise DataFormatError(f"bad model header in {path}")
        sizes = [int(s) for s in header[1].split("x")]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = np.asarray([float(v) for v in fh.readline().strip().split(",")])
            b = np.asarray([float(v) for v in fh.readline().strip().split(",")])
            if w.size != fan_in * fan_out or b.size != fan_out:
                raise DataFormatError(f"layer size mismatch in {path}")
            weights.append(w.reshape(fan_in, fan_out))
            biases.append(b)
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases)


def save_ensemble(ensemble, prefix):
    """Write base/top model files, the normalization sidecar and the
    ensemble manifest; returns the manifest path."""
    base_paths = []
    for k, base in enumerate(ensemble.base_models):
        p = f"{prefix}_base{k + 1}.mlp"
        save_mlp(base, p)
        base_paths.append(os.path.basename(p))
    top_path = f"{prefix}_top.mlp"
    save_mlp(ensemble.top_model, top_path)
    norm_path = f"{prefix}.norm"
    with open(norm_path, "w") as fh:
        fh.write(",".join(_fmt(v) for v in ensemble.transform.means) + "\n")
        fh.write(",".join(_fmt(v) for v in ensemble.transform.stds) + "\n")
    manifest = f"{prefix}.ensemble"
    m, n, a = ensemble.dims
    with open(manifest, "w") as fh:
        fh.write("version,1\n")
        fh.write(f"dims,{m},{n},{a}\n")
        fh.write(f"transform,{ensemble.transform.kind}\n")
        fh.write(f"target_offset,{_fmt(ensemble.target_offset)}\n")
        fh.write("bases," + ",".join(base_paths) + "\n")
        fh.write(f"top,{os.path.basename(top_path)}\n")
        fh.write(f"norm,{os.path.basename(norm_path)}\n")
        if ensemble.val_accuracy:
            keys = sorted(ensemble.val_accuracy)
            fh.write("val_accuracy," + ",".join(
                f"{k}={_fmt(ensemble.val_accuracy[k])}" for k in keys) + "\n")
    return manifest


def load_ensemble(path):
    folder = os.path.dirname(os.path.abspath(path))
    fields = {}
    with open(path) as fh:
        for line in fh:
            key, _, rest = line.strip().partition(",")
            fields[key] = rest
    try:
        dims = tuple(int(v) for v in fields["dims"].split(","))
        kind = fields["transform"]
        target_offset = float(fields["target_offset"])
        base_names = fields["bases"].split(",")
        top_name = fields["top"]
        norm_name = fields["norm"]
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad ensemble manifest {path}") from exc
    bases = [load_mlp(os.path.join(folder, nm)) for nm in base_names]
    top = load_mlp(os.path.join(folder, top_name))
    with open(os.path.join(folder, norm_name)) as fh:
        means = np.asarray([float(v) for v in fh.readline().strip().split(",")])
        stds = np.asarray([float(v) for v in fh.readline().strip().split(",")])
    val_acc = {}
    if "val_accuracy" in fields:
        for item in fields["val_accuracy"].split(","):
            k, _, v = item.partition("=")
            val_acc[k] = float(v)
    return EnsembleModel(dims=dims, base_models=bases, top_model=top,
                         transform=FeatureTransform(kind=kind, means=means,
                                                    stds=stds),
                         target_offset=target_offset, val_accuracy=val_acc)
