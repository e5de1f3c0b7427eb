"""The three classifier kinds behind one train/predict contract.

Label encoding everywhere: 1 = high energy (the positive class for F1),
0 = low. Neural models train with early stopping on validation F1 for up
to ``max_epochs`` epochs, keeping the best-F1 parameter snapshot.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import forest as forest_mod
from .data import ShotLabel
from .engine import Adam, Tape, Tensor, check_finite, ops
from .errors import ConfigMismatch, ShapeMismatch, SingleClassTraining
from .metrics import f1_score
from .preprocess import FeatureSeries, PaddedSeries

CNN_CHANNELS = (32, 64)
CNN_KERNEL = 5
CNN_POOL = 2
LSTM_HIDDEN = 64

#: Shortest input the CNN stack accepts: two k=5 valid convolutions around
#: a width-2 pool need (T - 4) // 2 >= 5.
MIN_CNN_INPUT = 14


class ModelKind(Enum):
    MOTION_RANGE_FOREST = "forest"
    CNN1D = "cnn1d"
    LSTM_SEQ = "lstm"


@dataclass
class TrainConfig:
    max_epochs: int = 2500
    patience: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    class_weighting: bool = False
    n_trees: int = 200

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class TrainedModel:
    """Immutable after training; predictions are deterministic in (model, input)."""

    kind: ModelKind
    params: dict[str, np.ndarray]
    preprocess: dict
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return int(self.preprocess.get("n_features", 0))


def label_to_int(label: ShotLabel) -> int:
    return 1 if label is ShotLabel.HIGH else 0


def motion_range_features(series: FeatureSeries | PaddedSeries) -> np.ndarray:
    """Per-feature max - min over time; padding rows excluded."""
    if isinstance(series, PaddedSeries):
        values = series.values[: series.valid_length]
    else:
        values = series.values
    return values.max(axis=0) - values.min(axis=0)


def stack_padded(series: list[PaddedSeries]):
    """Stack equally padded series into (X (N,L,F), lengths, labels)."""
    if not series:
        raise ShapeMismatch("empty series list")
    shape = series[0].values.shape
    for s in series:
        if s.values.shape != shape:
            raise ShapeMismatch(
                f"{s.clip_id}: shape {s.values.shape} != {shape}; pad to one target"
            )
    x = np.stack([s.values for s in series])
    lengths = np.array([s.valid_length for s in series], dtype=np.int64)
    labels = np.array(
        [-1 if s.label is None else label_to_int(s.label) for s in series],
        dtype=np.int64,
    )
    return x, lengths, labels


def _glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(kind: ModelKind, n_features: int, seed: int) -> dict[str, np.ndarray]:
    """Seeded hidden-layer init; the readout starts at zero so an untrained
    network scores exactly 0.5 and the two classes are exactly symmetric."""
    rng = np.random.default_rng(seed)
    if kind is ModelKind.CNN1D:
        c1, c2 = CNN_CHANNELS
        k = CNN_KERNEL
        return {
            "conv1_w": _glorot(rng, (c1, n_features, k), n_features * k, c1 * k),
            "conv1_b": np.zeros(c1),
            "conv2_w": _glorot(rng, (c2, c1, k), c1 * k, c2 * k),
            "conv2_b": np.zeros(c2),
            "out_w": np.zeros((c2, 2)),
            "out_b": np.zeros(2),
        }
    if kind is ModelKind.LSTM_SEQ:
        h = LSTM_HIDDEN
        b = np.zeros(4 * h)
        b[h : 2 * h] = 1.0  # open forget gates at the start of training
        return {
            "wx": _glorot(rng, (n_features, 4 * h), n_features, 4 * h),
            "wh": _glorot(rng, (h, 4 * h), h, 4 * h),
            "b": b,
            "out_w": np.zeros((h, 2)),
            "out_b": np.zeros(2),
        }
    raise ValueError(f"no neural init for {kind}")


def _forward_logits(kind, params: dict[str, Tensor], x, lengths, tape):
    xt = Tensor(x)
    if kind is ModelKind.CNN1D:
        h = ops.conv1d(tape, xt, params["conv1_w"], params["conv1_b"])
        h = ops.relu(tape, h)
        h = ops.maxpool1d(tape, h, CNN_POOL)
        h = ops.conv1d(tape, h, params["conv2_w"], params["conv2_b"])
        h = ops.relu(tape, h)
        h = ops.global_avg_pool(tape, h)
    elif kind is ModelKind.LSTM_SEQ:
        h = ops.lstm(tape, xt, lengths, params["wx"], params["wh"], params["b"])
    else:
        raise ValueError(f"no forward pass for {kind}")
    h = ops.matmul(tape, h, params["out_w"])
    return ops.add(tape, h, params["out_b"])


def _proba_high(kind, arrays: dict[str, np.ndarray], x, lengths) -> np.ndarray:
    params = {k: Tensor(v) for k, v in arrays.items()}
    out = []
    for start in range(0, x.shape[0], 256):
        logits = _forward_logits(
            kind, params, x[start : start + 256], lengths[start : start + 256], None
        )
        out.append(ops.softmax_probs(logits.data)[:, 1])
    return np.concatenate(out)


def train_neural(
    kind: ModelKind,
    train: list[PaddedSeries],
    val: list[PaddedSeries],
    config: TrainConfig,
    preprocess_snapshot: dict | None = None,
) -> TrainedModel:
    """Train with per-epoch validation F1 early stopping.

    Stops after ``patience`` epochs without strict F1 improvement and
    returns the best-F1 snapshot. If the validation F1 never rises above
    zero, the initial parameters come back with ``no_improvement`` set.
    """
    if kind not in (ModelKind.CNN1D, ModelKind.LSTM_SEQ):
        raise ValueError(f"train_neural cannot train {kind}")
    x_train, len_train, y_train = stack_padded(train)
    x_val, len_val, y_val = stack_padded(val)
    if (y_train < 0).any() or (y_val < 0).any():
        raise SingleClassTraining("unlabeled sequence in training input")
    if len(np.unique(y_train)) < 2:
        raise SingleClassTraining("training folders contain a single class")
    if len(np.unique(y_val)) < 2:
        raise SingleClassTraining("validation folder contains a single class")
    if kind is ModelKind.CNN1D and x_train.shape[1] < MIN_CNN_INPUT:
        raise ConfigMismatch(
            f"CNN needs inputs padded to >= {MIN_CNN_INPUT}, got {x_train.shape[1]}"
        )

    n, _, n_features = x_train.shape
    arrays = init_params(kind, n_features, config.seed)
    initial = {k: v.copy() for k, v in arrays.items()}
    params = {k: Tensor(v, requires_grad=True) for k, v in arrays.items()}
    opt = Adam(list(params.values()), lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    if config.class_weighting:
        counts = np.bincount(y_train, minlength=2)
        class_w = n / (2.0 * np.maximum(counts, 1))
        sample_w = class_w[y_train]
    else:
        sample_w = np.ones(n)

    best_f1 = -np.inf
    best_params = None
    best_epoch = 0
    epochs_without = 0
    epochs_run = 0

    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            tape = Tape()
            logits = _forward_logits(kind, params, x_train[idx], len_train[idx], tape)
            loss = ops.softmax_cross_entropy(tape, logits, y_train[idx], sample_w[idx])
            opt.zero_grads()
            tape.backward(loss)
            check_finite([p.grad for p in params.values()])
            opt.step()
            check_finite([p.data for p in params.values()], what="parameter")

        proba = _proba_high(kind, {k: p.data for k, p in params.items()}, x_val, len_val)
        val_f1 = f1_score(y_val, (proba >= 0.5).astype(np.int64))
        if val_f1 > best_f1:
            best_f1 = val_f1
            best_params = {k: p.data.copy() for k, p in params.items()}
            best_epoch = epoch
            epochs_without = 0
        else:
            epochs_without += 1
            if epochs_without >= config.patience:
                break

    no_improvement = best_f1 <= 0.0
    if no_improvement:
        warnings.warn("validation F1 never improved above zero; keeping initial parameters")
        best_params = initial
        best_epoch = 0

    snapshot = dict(preprocess_snapshot or {})
    snapshot.setdefault("n_features", n_features)
    snapshot.setdefault("pad_to", x_train.shape[1])
    return TrainedModel(
        kind=kind,
        params=best_params,
        preprocess=snapshot,
        meta={
            "epochs_run": epochs_run,
            "best_epoch": best_epoch,
            "best_val_f1": 0.0 if no_improvement else float(best_f1),
            "seed": config.seed,
            "no_improvement": no_improvement,
        },
    )


def train_forest(
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    preprocess_snapshot: dict | None = None,
) -> TrainedModel:
    """Fit the motion-range forest on precomputed range vectors."""
    features = np.asarray(features, dtype=np.float64)
    trees = forest_mod.fit_forest(
        features, labels, n_trees=config.n_trees, seed=config.seed
    )
    params: dict[str, np.ndarray] = {}
    for i, tree in enumerate(trees):
        for name, arr in tree.items():
            params[f"tree{i:04d}.{name}"] = arr
    snapshot = dict(preprocess_snapshot or {})
    snapshot.setdefault("n_features", features.shape[1])
    return TrainedModel(
        kind=ModelKind.MOTION_RANGE_FOREST,
        params=params,
        preprocess=snapshot,
        meta={"n_trees": config.n_trees, "seed": config.seed},
    )


def _forest_trees(model: TrainedModel) -> list[dict[str, np.ndarray]]:
    trees: dict[int, dict[str, np.ndarray]] = {}
    for key, arr in model.params.items():
        prefix, name = key.split(".", 1)
        trees.setdefault(int(prefix[4:]), {})[name] = arr
    return [trees[i] for i in sorted(trees)]


def predict_proba_batch(model: TrainedModel, x: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Probability of high energy per padded input row."""
    if model.kind is ModelKind.MOTION_RANGE_FOREST:
        ranges = np.stack(
            [x[i, : lengths[i]].max(axis=0) - x[i, : lengths[i]].min(axis=0)
             for i in range(x.shape[0])]
        )
        return forest_mod.forest_predict_proba(_forest_trees(model), ranges)
    expect = int(model.preprocess.get("pad_to", x.shape[1]))
    if x.shape[1] != expect or x.shape[2] != model.n_features:
        raise ConfigMismatch(
            f"input shape {x.shape[1:]} inconsistent with training-time "
            f"config ({expect}, {model.n_features})"
        )
    return _proba_high(model.kind, model.params, x, lengths)


def predict_proba(model: TrainedModel, series: PaddedSeries | FeatureSeries) -> float:
    """Probability of high energy for one preprocessed input."""
    if model.kind is ModelKind.MOTION_RANGE_FOREST:
        ranges = motion_range_features(series)
        if ranges.shape[0] != model.n_features:
            raise ConfigMismatch(
                f"{ranges.shape[0]} features vs model's {model.n_features}"
            )
        return float(forest_mod.forest_predict_proba(_forest_trees(model), ranges)[0])
    if not isinstance(series, PaddedSeries):
        raise ConfigMismatch("neural models take a PaddedSeries input")
    x = series.values[None, :, :]
    lengths = np.array([series.valid_length], dtype=np.int64)
    return float(predict_proba_batch(model, x, lengths)[0])


def predict_label(model: TrainedModel, series) -> ShotLabel:
    """Thresholds predict_proba at 0.5; the same rule accuracy/F1 use."""
    return ShotLabel.HIGH if predict_proba(model, series) >= 0.5 else ShotLabel.LOW
