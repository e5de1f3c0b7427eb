"""Classification metrics and cross-run aggregation.

Labels and predictions are binary int arrays (1 = high energy, the positive
class; 0 = low). AUC uses the rank-statistic formulation with ties counted
one half.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, SingleClassTest, TooFewRuns

Z_95 = 1.96


@dataclass(frozen=True)
class RunResult:
    """Metrics of one cross-validation run."""

    val_folder: str
    test_folder: str
    accuracy: float
    auc_roc: float
    f1: float
    n_test: int

    @property
    def split_id(self) -> tuple[str, str]:
        return (self.val_folder, self.test_folder)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class AggregateReport:
    """Mean, sample standard deviation, and 95% CI per metric."""

    accuracy: MetricSummary
    auc_roc: MetricSummary
    f1: MetricSummary
    n_runs: int


def _as_arrays(labels, predictions):
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if y.shape != p.shape:
        raise EmptyInput(f"length mismatch: {y.shape} vs {p.shape}")
    if y.size == 0:
        raise EmptyInput("empty inputs")
    return y, p


def accuracy(labels, predictions) -> float:
    y, p = _as_arrays(labels, predictions)
    return float((y == p).mean())


def f1_score(labels, predictions, positive: int = 1) -> float:
    """Harmonic mean of precision and recall for the positive class.

    Zero by convention whenever precision + recall is zero.
    """
    y, p = _as_arrays(labels, predictions)
    tp = int(((p == positive) & (y == positive)).sum())
    fp = int(((p == positive) & (y != positive)).sum())
    fn = int(((p != positive) & (y == positive)).sum())
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def _tied_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; equal values share the average of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_roc(labels, scores) -> float:
    """Probability that a random positive outranks a random negative."""
    y, s = _as_arrays(labels, scores)
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTest("AUC needs both classes in the test set")
    ranks = _tied_ranks(s.astype(np.float64))
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _summary(values: np.ndarray) -> MetricSummary:
    n = values.size
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    half = Z_95 * std / np.sqrt(n)
    return MetricSummary(mean=mean, std=std, ci_low=mean - half, ci_high=mean + half)


def aggregate(runs: list[RunResult]) -> AggregateReport:
    """Aggregate per-run metrics: sample mean/std and normal-approximation CI."""
    if len(runs) < 2:
        raise TooFewRuns(f"need at least 2 runs, got {len(runs)}")
    acc = np.array([r.accuracy for r in runs])
    auc = np.array([r.auc_roc for r in runs])
    f1 = np.array([r.f1 for r in runs])
    return AggregateReport(
        accuracy=_summary(acc),
        auc_roc=_summary(auc),
        f1=_summary(f1),
        n_runs=len(runs),
    )


def format_report_table(report: AggregateReport) -> str:
    """Render mean +/- std [ci_low, ci_high] rows at two decimals."""
    lines = [f"metric    mean +/- std  [95% CI]     (n={report.n_runs})"]
    for name, s in (
        ("accuracy", report.accuracy),
        ("auc_roc", report.auc_roc),
        ("f1", report.f1),
    ):
        lines.append(
            f"{name:<9} {s.mean:.2f} +/- {s.std:.2f} [{s.ci_low:.2f}, {s.ci_high:.2f}]"
        )
    return "\n".join(lines)


def report_to_csv(report: AggregateReport) -> str:
    rows = ["metric,mean,std,ci_low,ci_high,n_runs"]
    for name, s in (
        ("accuracy", report.accuracy),
        ("auc_roc", report.auc_roc),
        ("f1", report.f1),
    ):
        rows.append(
            f"{name},{s.mean!r},{s.std!r},{s.ci_low!r},{s.ci_high!r},{report.n_runs}"
        )
    return "\n".join(rows) + "\n"


def results_to_csv(runs: list[RunResult]) -> str:
    rows = ["val_folder,test_folder,accuracy,auc_roc,f1,n_test"]
    for r in runs:
        rows.append(
            f"{r.val_folder},{r.test_folder},{r.accuracy!r},{r.auc_roc!r},"
            f"{r.f1!r},{r.n_test}"
        )
    return "\n".join(rows) + "\n"
