"""Match-statistics machinery: runs-based weak labels, prediction joins,
region distributions, the two deviation metrics, baselines, and the
per-phase / per-bowler summaries.

Runs-scored heuristic: 3 or more runs is a high-energy shot, 1 or fewer is
low-energy, exactly 2 falls in neither branch and is excluded throughout
(including baseline accuracy denominators).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .data import REGIONS, BallRecord, FieldRegion, ShotLabel
from .errors import DuplicateOverKey, MalformedHeader, MalformedRow, RegionMismatch

PREDICTIONS_HEADER = "match_id,over,ball,label,score"


class ShotSource(Enum):
    HEURISTIC = "heuristic"
    GROUND_TRUTH = "ground_truth"
    MODEL_PREDICTION = "model_prediction"
    RANDOM_BASELINE = "random_baseline"
    RUNS_BASELINE = "runs_baseline"


@dataclass(frozen=True)
class EnergyShot:
    match_id: str
    over_number: int
    ball: int
    region: FieldRegion
    energy: ShotLabel
    source: ShotSource

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.match_id, self.over_number, self.ball)


@dataclass(frozen=True)
class PredictionRecord:
    """One classified shot keyed to its delivery."""

    match_id: str
    over_number: int
    ball: int
    label: ShotLabel
    score: float

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.match_id, self.over_number, self.ball)


@dataclass(frozen=True)
class RegionDistribution:
    """Percentage of a class's shots per region; sums to 100 (or all zero)."""

    shares: dict[FieldRegion, float]

    def __post_init__(self):
        total = sum(self.shares.values())
        if abs(total - 100.0) > 1e-9 and abs(total) > 1e-9:
            raise ValueError(f"shares sum to {total}, expected 100 or 0")


@dataclass(frozen=True)
class ProportionTable:
    """Per-region (high_ratio, low_ratio, total_count)."""

    rows: dict[FieldRegion, tuple[float, float, int]]

    @classmethod
    def from_ratios(cls, high_ratios: dict[FieldRegion, float],
                    counts: dict[FieldRegion, int] | None = None) -> "ProportionTable":
        rows = {}
        for region, h in high_ratios.items():
            n = 0 if counts is None else counts.get(region, 0)
            rows[region] = (float(h), 1.0 - float(h), int(n))
        return cls(rows=rows)


def heuristic_energy(runs: int) -> ShotLabel | None:
    """Weak label from runs scored; None for the uncovered 2-run case."""
    if runs < 0:
        raise ValueError(f"runs must be non-negative, got {runs}")
    if runs >= 3:
        return ShotLabel.HIGH
    if runs <= 1:
        return ShotLabel.LOW
    return None


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != PREDICTIONS_HEADER:
        raise MalformedHeader(f"{path}: header does not match predictions schema")
    out = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = [t.strip() for t in line.split(",")]
        if len(tokens) != 5:
            raise MalformedRow(f"{path}: line {line_no}: expected 5 fields")
        match_id, over_s, ball_s, label_s, score_s = tokens
        try:
            over = int(over_s)
            ball = int(ball_s)
            score = float(score_s)
            label = ShotLabel(label_s.lower())
        except ValueError as exc:
            raise MalformedRow(f"{path}: line {line_no}: {exc}")
        out.append(PredictionRecord(match_id, over, ball, label, score))
    return out


def _unique_keys(items, what: str):
    seen = set()
    for it in items:
        if it.key in seen:
            raise DuplicateOverKey(f"duplicate {what} key {it.key}")
        seen.add(it.key)


def join_predictions(
    records: list[BallRecord],
    predictions: list[PredictionRecord],
    source: ShotSource = ShotSource.MODEL_PREDICTION,
) -> tuple[list[EnergyShot], list[PredictionRecord]]:
    """Inner join on (match_id, over, ball); returns (joined, unmatched)."""
    _unique_keys(records, "ball record")
    _unique_keys(predictions, "prediction")
    by_key = {r.key: r for r in records}
    joined, unmatched = [], []
    for pred in predictions:
        rec = by_key.get(pred.key)
        if rec is None:
            unmatched.append(pred)
            continue
        joined.append(
            EnergyShot(
                match_id=pred.match_id,
                over_number=pred.over_number,
                ball=pred.ball,
                region=rec.region,
                energy=pred.label,
                source=source,
            )
        )
    return joined, unmatched


def heuristic_shots(records: list[BallRecord]) -> list[EnergyShot]:
    """Weak-labeled shots from statistics alone; 2-run balls drop out."""
    out = []
    for rec in records:
        label = heuristic_energy(rec.runs)
        if label is None:
            continue
        out.append(
            EnergyShot(
                match_id=rec.match_id,
                over_number=rec.over_number,
                ball=rec.ball_in_over,
                region=rec.region,
                energy=label,
                source=ShotSource.HEURISTIC,
            )
        )
    return out


def region_distribution(shots: list[EnergyShot], cls: ShotLabel) -> RegionDistribution:
    counts = {region: 0 for region in REGIONS}
    total = 0
    for shot in shots:
        if shot.energy is cls:
            counts[shot.region] += 1
            total += 1
    if total == 0:
        return RegionDistribution(shares={region: 0.0 for region in REGIONS})
    return RegionDistribution(
        shares={region: 100.0 * counts[region] / total for region in REGIONS}
    )


def distribution_deviation(
    a: tuple[RegionDistribution, RegionDistribution],
    b: tuple[RegionDistribution, RegionDistribution],
) -> float:
    """Summed absolute share difference over both classes, in percentage points."""
    total = 0.0
    for dist_a, dist_b in zip(a, b):
        for region in REGIONS:
            total += abs(dist_a.shares[region] - dist_b.shares[region])
    return total


def proportion_table(shots: list[EnergyShot]) -> ProportionTable:
    """Per-region high/(high+low) ratio with counts."""
    high = {region: 0 for region in REGIONS}
    low = {region: 0 for region in REGIONS}
    for shot in shots:
        if shot.energy is ShotLabel.HIGH:
            high[shot.region] += 1
        else:
            low[shot.region] += 1
    rows = {}
    for region in REGIONS:
        n = high[region] + low[region]
        if n == 0:
            rows[region] = (0.0, 0.0, 0)
        else:
            ratio = high[region] / n
            rows[region] = (ratio, 1.0 - ratio, n)
    return ProportionTable(rows=rows)


def avg_proportion_deviation(truth: ProportionTable, model: ProportionTable) -> float:
    """Mean over regions of |high-ratio difference|, in percentage points.

    By complement symmetry the low-ratio version gives the same value.
    """
    if set(truth.rows) != set(model.rows):
        raise RegionMismatch("tables cover different region sets")
    devs = [
        abs(truth.rows[region][0] - model.rows[region][0])
        for region in truth.rows
    ]
    return 100.0 * float(np.mean(devs))


class BaselineKind(Enum):
    RANDOM = "random"
    RUNS_APPROX = "runs_approx"


def baseline_predict(
    kind: BaselineKind, records: list[BallRecord], seed: int = 0
) -> dict[tuple[str, int, int], ShotLabel]:
    """Label every delivery by fair coin (seeded) or by the runs heuristic.

    The runs approximation leaves 2-run deliveries out of its output.
    """
    out: dict[tuple[str, int, int], ShotLabel] = {}
    if kind is BaselineKind.RANDOM:
        rng = np.random.default_rng(seed)
        for rec in records:
            out[rec.key] = ShotLabel.HIGH if rng.integers(0, 2) else ShotLabel.LOW
    else:
        for rec in records:
            label = heuristic_energy(rec.runs)
            if label is not None:
                out[rec.key] = label
    return out


def summarize_phases(
    shots: list[EnergyShot], bucket_width: int = 10, max_bucket_start: int = 40
) -> list[dict]:
    """Low/high counts per over range: 0-10, 10-20, ... and a final 40+."""
    edges = list(range(0, max_bucket_start + 1, bucket_width))
    rows = []
    for i, lo in enumerate(edges):
        last = lo == edges[-1]
        hi = None if last else lo + bucket_width
        label = f"{lo}+" if last else f"{lo}-{hi}"
        low = high = 0
        for shot in shots:
            over = shot.over_number
            if over >= lo and (last or over < hi):
                if shot.energy is ShotLabel.HIGH:
                    high += 1
                else:
                    low += 1
        rows.append({"id": i, "over_range": label, "low": low, "high": high})
    return rows


def summarize_by_bowler(
    shots: list[EnergyShot], records: list[BallRecord]
) -> list[dict]:
    """Per-bowler total runs, high/low shot counts, and balls faced.

    Runs and balls come from all of the bowler's deliveries; the energy
    split counts only deliveries present in ``shots``.
    """
    by_key = {r.key: r for r in records}
    stats: dict[str, dict] = {}
    for rec in records:
        entry = stats.setdefault(
            rec.bowler, {"bowler": rec.bowler, "runs": 0, "high": 0, "low": 0, "balls": 0}
        )
        entry["runs"] += rec.runs
        entry["balls"] += 1
    for shot in shots:
        rec = by_key.get(shot.key)
        if rec is None:
            continue
        stats[rec.bowler]["high" if shot.energy is ShotLabel.HIGH else "low"] += 1
    return sorted(stats.values(), key=lambda e: (-e["runs"], e["bowler"]))


def prediction_accuracy(
    predicted: dict[tuple[str, int, int], ShotLabel],
    truth: dict[tuple[str, int, int], ShotLabel],
) -> float:
    """Accuracy over the keys present in both mappings."""
    keys = sorted(set(predicted) & set(truth))
    if not keys:
        raise ValueError("no overlapping keys between predictions and truth")
    hits = sum(1 for k in keys if predicted[k] is truth[k])
    return hits / len(keys)
