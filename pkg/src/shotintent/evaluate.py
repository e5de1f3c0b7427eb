"""Ordered leave-pair-out cross-validation over match folders, plus the
clip-length ablation.

Every ordered (validation folder, test folder) pair is one run; the
remaining folders train. The motion-range forest needs no validation
folder, so its runs collapse to plain leave-one-out: train on all folders
but the test one, giving n distinct results instead of n*(n-1).
"""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import FoldedDataset, ShotLabel
from .errors import TooFewFolders
from .metrics import AggregateReport, RunResult, accuracy, aggregate, auc_roc, f1_score
from .models import (
    MIN_CNN_INPUT,
    ModelKind,
    TrainConfig,
    TrainedModel,
    label_to_int,
    predict_proba_batch,
    train_forest,
    train_neural,
)
from .preprocess import (
    DEFAULT_CAP,
    DEFAULT_DROP,
    DEFAULT_V_MIN,
    preprocess_sequence,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitPlan:
    """All ordered (val, test) folder pairs in lexicographic order."""

    pairs: tuple[tuple[str, str], ...]

    def __len__(self):
        return len(self.pairs)


def enumerate_splits(dataset: FoldedDataset | list[str]) -> SplitPlan:
    """n folders -> n*(n-1) ordered pairs; needs >= 3 so training is non-empty."""
    if isinstance(dataset, FoldedDataset):
        folder_ids = dataset.folder_ids()
    else:
        folder_ids = sorted(dataset)
    if len(folder_ids) < 3:
        raise TooFewFolders(f"need >= 3 folders, got {len(folder_ids)}")
    pairs = tuple(
        (val, test)
        for val in folder_ids
        for test in folder_ids
        if val != test
    )
    return SplitPlan(pairs=pairs)


def split_seed(master_seed: int, val_id: str, test_id: str) -> int:
    """Stable per-split seed derived from the master seed and split id."""
    digest = hashlib.blake2b(
        f"{master_seed}:{val_id}:{test_id}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass
class _PreparedFolders:
    """Per-folder padded arrays shared read-only across all splits."""

    x: dict[str, np.ndarray]
    lengths: dict[str, np.ndarray]
    y: dict[str, np.ndarray]
    pad_to: int
    snapshot: dict


def pad_target_for(kind: ModelKind, cap: int) -> int:
    """CNN inputs are padded up to its minimum stack length for short caps."""
    if kind is ModelKind.CNN1D:
        return max(cap, MIN_CNN_INPUT)
    return cap


def prepare_folders(
    dataset: FoldedDataset,
    kind: ModelKind,
    drop: int = DEFAULT_DROP,
    cap: int = DEFAULT_CAP,
    v_min: float = DEFAULT_V_MIN,
) -> _PreparedFolders:
    pad_to = pad_target_for(kind, cap)
    xs, lens, ys = {}, {}, {}
    for fid in dataset.folder_ids():
        padded = []
        for seq in dataset.folders[fid]:
            try:
                padded.append(
                    preprocess_sequence(seq, drop=drop, cap=cap, v_min=v_min, pad_to=pad_to)
                )
            except Exception as exc:
                raise type(exc)(f"clip {seq.clip_id!r}: {exc}") from exc
        xs[fid] = np.stack([p.values for p in padded])
        lens[fid] = np.array([p.valid_length for p in padded], dtype=np.int64)
        ys[fid] = np.array(
            [label_to_int(p.label) for p in padded], dtype=np.int64
        )
    snapshot = {
        "drop": drop,
        "cap": cap,
        "v_min": v_min,
        "pad_to": pad_to,
        "n_features": next(iter(xs.values())).shape[2],
    }
    return _PreparedFolders(x=xs, lengths=lens, y=ys, pad_to=pad_to, snapshot=snapshot)


def _concat(prepared: _PreparedFolders, folder_ids: list[str]):
    x = np.concatenate([prepared.x[f] for f in folder_ids])
    lengths = np.concatenate([prepared.lengths[f] for f in folder_ids])
    y = np.concatenate([prepared.y[f] for f in folder_ids])
    return x, lengths, y


def _evaluate_model(model: TrainedModel, prepared, test_folder: str, val_folder: str):
    x, lengths, y = (
        prepared.x[test_folder],
        prepared.lengths[test_folder],
        prepared.y[test_folder],
    )
    scores = predict_proba_batch(model, x, lengths)
    preds = (scores >= 0.5).astype(np.int64)
    return RunResult(
        val_folder=val_folder,
        test_folder=test_folder,
        accuracy=accuracy(y, preds),
        auc_roc=auc_roc(y, scores),
        f1=f1_score(y, preds),
        n_test=int(y.size),
    )


def _series_for_training(x, lengths, y):
    from .preprocess import PaddedSeries

    out = []
    for i in range(x.shape[0]):
        out.append(
            PaddedSeries(
                values=x[i],
                valid_length=int(lengths[i]),
                feature_names=(),
                label=ShotLabel.HIGH if y[i] == 1 else ShotLabel.LOW,
            )
        )
    return out


def _run_neural_split(args):
    prepared, kind, config, master_seed, val_folder, test_folder, all_folders = args
    train_folders = [f for f in all_folders if f not in (val_folder, test_folder)]
    x_tr, len_tr, y_tr = _concat(prepared, train_folders)
    cfg = TrainConfig(
        max_epochs=config.max_epochs,
        patience=config.patience,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        seed=split_seed(master_seed, val_folder, test_folder),
        class_weighting=config.class_weighting,
        n_trees=config.n_trees,
    )
    try:
        model = train_neural(
            kind,
            _series_for_training(x_tr, len_tr, y_tr),
            _series_for_training(
                prepared.x[val_folder],
                prepared.lengths[val_folder],
                prepared.y[val_folder],
            ),
            cfg,
            preprocess_snapshot=prepared.snapshot,
        )
    except Exception as exc:
        raise type(exc)(f"split ({val_folder}, {test_folder}): {exc}") from exc
    return _evaluate_model(model, prepared, test_folder, val_folder)


def _run_forest_split(args):
    prepared, config, master_seed, test_folder, all_folders = args
    train_folders = [f for f in all_folders if f != test_folder]
    x_tr, len_tr, y_tr = _concat(prepared, train_folders)
    ranges = np.stack(
        [x_tr[i, : len_tr[i]].max(axis=0) - x_tr[i, : len_tr[i]].min(axis=0)
         for i in range(x_tr.shape[0])]
    )
    cfg = TrainConfig(
        seed=split_seed(master_seed, "-", test_folder),
        n_trees=config.n_trees,
    )
    try:
        model = train_forest(ranges, y_tr, cfg, preprocess_snapshot=prepared.snapshot)
    except Exception as exc:
        raise type(exc)(f"split (-, {test_folder}): {exc}") from exc
    return _evaluate_model(model, prepared, test_folder, "-")


def run_cv(
    dataset: FoldedDataset,
    kind: ModelKind,
    config: TrainConfig | None = None,
    drop: int = DEFAULT_DROP,
    cap: int = DEFAULT_CAP,
    v_min: float = DEFAULT_V_MIN,
    workers: int = 1,
) -> tuple[list[RunResult], AggregateReport]:
    """Run the full ordered leave-pair-out protocol.

    Fully deterministic given config.seed: each split trains with a seed
    derived from (master seed, val folder, test folder). Splits whose val
    or test folder lacks a class are skipped with a warning.
    """
    config = config or TrainConfig()
    master_seed = config.seed
    plan = enumerate_splits(dataset)
    folder_ids = dataset.folder_ids()
    prepared = prepare_folders(dataset, kind, drop=drop, cap=cap, v_min=v_min)

    single_class = {
        fid for fid in folder_ids if len(np.unique(prepared.y[fid])) < 2
    }
    for fid in sorted(single_class):
        logger.warning("folder %s has a single class; splits using it are skipped", fid)

    if kind is ModelKind.MOTION_RANGE_FOREST:
        tasks = [
            (prepared, config, master_seed, test, folder_ids)
            for test in folder_ids
            if test not in single_class
        ]
        runner = _run_forest_split
    else:
        tasks = [
            (prepared, kind, config, master_seed, val, test, folder_ids)
            for val, test in plan.pairs
            if val not in single_class and test not in single_class
        ]
        runner = _run_neural_split

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(runner, tasks))
    else:
        results = [runner(t) for t in tasks]

    results.sort(key=lambda r: r.split_id)
    return results, aggregate(results)


def ablate_clip_length(
    dataset: FoldedDataset,
    kind: ModelKind,
    lengths: list[int],
    config: TrainConfig | None = None,
    drop: int = DEFAULT_DROP,
    v_min: float = DEFAULT_V_MIN,
    workers: int = 1,
) -> list[dict]:
    """Re-run the CV with the preprocessing cap overridden per length."""
    rows = []
    for cap in lengths:
        if cap < 1:
            raise ValueError(f"ablation length {cap} must be positive")
        _, report = run_cv(
            dataset, kind, config, drop=drop, cap=cap, v_min=v_min, workers=workers
        )
        rows.append(
            {
                "length": cap,
                "accuracy": report.accuracy.mean,
                "auc_roc": report.auc_roc.mean,
                "f1": report.f1.mean,
            }
        )
    return rows


def ablation_to_csv(rows: list[dict]) -> str:
    out = ["length,accuracy,auc_roc,f1"]
    for r in rows:
        out.append(f"{r['length']},{r['accuracy']!r},{r['auc_roc']!r},{r['f1']!r}")
    return "\n".join(out) + "\n"
