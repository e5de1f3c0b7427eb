"""Command-line entry point.

Subcommands: inspect, train, evaluate, ablate, segment, case-study, plot.
Usage problems exit 2 (argparse); toolkit errors exit 1 with a single-line
diagnostic. All outputs are deterministic given the resolved config + seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import casestudy as cs
from . import segmentation as seg
from .config import config_to_json, resolve_config
from .data import REGIONS, ShotLabel, load_ball_records, load_dataset, parse_region
from .errors import ShotIntentError
from .evaluate import ablate_clip_length, ablation_to_csv, pad_target_for, run_cv
from .metrics import format_report_table, report_to_csv, results_to_csv
from .modelio import save_model
from .models import (
    ModelKind,
    TrainConfig,
    stack_padded,
    train_forest,
    train_neural,
)
from .preprocess import preprocess_sequence
from .wagonwheel import render_wagon_wheel

logger = logging.getLogger("shotintent")

_MODEL_FLAGS = {
    "cnn1d": ModelKind.CNN1D,
    "lstm": ModelKind.LSTM_SEQ,
    "forest": ModelKind.MOTION_RANGE_FOREST,
}


def _parse_set(values: list[str] | None) -> dict:
    overrides = {}
    for item in values or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ShotIntentError(f"--set expects key=value, got {item!r}")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _resolved(args) -> dict:
    overrides = _parse_set(getattr(args, "set", None))
    if getattr(args, "workers", None) is not None:
        overrides["cv.workers"] = args.workers
    resolved = resolve_config(
        config_path=getattr(args, "config", None),
        overrides=overrides,
        seed_flag=getattr(args, "seed", None),
    )
    logger.info("resolved config: %s", json.dumps(resolved, sort_keys=True))
    return resolved


def _train_config(resolved: dict, seed: int | None = None) -> TrainConfig:
    return TrainConfig(
        max_epochs=int(resolved["train.max_epochs"]),
        patience=int(resolved["train.patience"]),
        batch_size=int(resolved["train.batch_size"]),
        learning_rate=float(resolved["train.learning_rate"]),
        seed=int(resolved["seed"] if seed is None else seed),
        class_weighting=bool(resolved["train.class_weighting"]),
        n_trees=int(resolved["forest.n_trees"]),
    )


def cmd_inspect(args) -> int:
    dataset = load_dataset(args.data)
    counts = dataset.counts()
    print(f"{'Folder':<12} {'High':>6} {'Low':>6}")
    for fid, (high, low) in counts.items():
        print(f"{fid:<12} {high:>6} {low:>6}")
    total_high, total_low = dataset.total_counts()
    print(f"{'Total':<12} {total_high:>6} {total_low:>6}")
    return 0


def cmd_train(args) -> int:
    resolved = _resolved(args)
    dataset = load_dataset(args.data)
    kind = _MODEL_FLAGS[args.model]
    drop = int(resolved["preprocess.drop"])
    cap = int(resolved["preprocess.cap"])
    v_min = float(resolved["preprocess.v_min"])
    pad_to = pad_target_for(kind, cap)
    snapshot = {"drop": drop, "cap": cap, "v_min": v_min, "pad_to": pad_to}
    config = _train_config(resolved)

    folder_ids = dataset.folder_ids()
    val_folder = args.val_folder or folder_ids[-1]
    if val_folder not in dataset.folders:
        raise ShotIntentError(f"validation folder {val_folder!r} not in dataset")

    def padded(fids):
        out = []
        for fid in fids:
            for seq in dataset.folders[fid]:
                out.append(
                    preprocess_sequence(seq, drop=drop, cap=cap, v_min=v_min, pad_to=pad_to)
                )
        return out

    if kind is ModelKind.MOTION_RANGE_FOREST:
        series = padded(folder_ids)
        x, lengths, y = stack_padded(series)
        ranges = np.stack(
            [x[i, : lengths[i]].max(axis=0) - x[i, : lengths[i]].min(axis=0)
             for i in range(x.shape[0])]
        )
        model = train_forest(ranges, y, config, preprocess_snapshot=snapshot)
    else:
        train_series = padded([f for f in folder_ids if f != val_folder])
        val_series = padded([val_folder])
        model = train_neural(kind, train_series, val_series, config,
                             preprocess_snapshot=snapshot)
    save_model(model, args.out)
    print(f"saved {kind.value} model to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    resolved = _resolved(args)
    dataset = load_dataset(args.data)
    kind = _MODEL_FLAGS[args.model]
    results, report = run_cv(
        dataset,
        kind,
        _train_config(resolved),
        drop=int(resolved["preprocess.drop"]),
        cap=int(resolved["preprocess.cap"]),
        v_min=float(resolved["preprocess.v_min"]),
        workers=int(resolved["cv.workers"]),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.csv").write_text(results_to_csv(results), encoding="utf-8")
    (out_dir / "aggregate.csv").write_text(report_to_csv(report), encoding="utf-8")
    table = format_report_table(report)
    (out_dir / "aggregate.txt").write_text(table + "\n", encoding="utf-8")
    (out_dir / "resolved_config.json").write_text(
        config_to_json(resolved), encoding="utf-8"
    )
    print(table)
    return 0


def cmd_ablate(args) -> int:
    resolved = _resolved(args)
    dataset = load_dataset(args.data)
    kind = _MODEL_FLAGS[args.model]
    lengths = [int(tok) for tok in args.lengths.split(",") if tok.strip()]
    rows = ablate_clip_length(
        dataset,
        kind,
        lengths,
        _train_config(resolved),
        drop=int(resolved["preprocess.drop"]),
        v_min=float(resolved["preprocess.v_min"]),
        workers=int(resolved["cv.workers"]),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation.csv").write_text(ablation_to_csv(rows), encoding="utf-8")
    (out_dir / "resolved_config.json").write_text(
        config_to_json(resolved), encoding="utf-8"
    )
    print(f"{'length':>6} {'accuracy':>9} {'auc':>6} {'f1':>6}")
    for r in rows:
        print(f"{r['length']:>6} {r['accuracy']:>9.2f} {r['auc_roc']:>6.2f} {r['f1']:>6.2f}")
    return 0


def cmd_segment(args) -> int:
    stream = seg.load_detections(args.detections)
    region = None
    if args.region:
        x0, x1, y0, y1 = (float(t) for t in args.region.split(","))
        region = seg.BatterRegion(x0, x1, y0, y1)
    band = seg.DEFAULT_TRACK_BAND
    if args.band:
        lo, hi = (float(t) for t in args.band.split(","))
        band = (lo, hi)
    clips = seg.extract_clips(
        stream,
        region=region,
        track_band=band,
        dwell=args.dwell,
        gap_max=args.gap_max,
        conf_min=args.conf_min,
    )
    Path(args.out).write_text(seg.clips_to_csv(clips), encoding="utf-8")
    print(f"extracted {len(clips)} clips to {args.out}")
    return 0


def _label_map(shots) -> dict:
    return {s.key: s.energy for s in shots}


def _write_wheels(out_dir: Path, tag: str, shots) -> None:
    for cls, suffix in ((ShotLabel.HIGH, "high"), (ShotLabel.LOW, "low")):
        dist = cs.region_distribution(shots, cls)
        svg = render_wagon_wheel(dist, title=f"{tag} {suffix}-energy shot regions")
        (out_dir / f"wheel_{tag}_{suffix}.svg").write_text(svg, encoding="utf-8")


def cmd_case_study(args) -> int:
    resolved = _resolved(args)
    seed = int(resolved["seed"])
    records = load_ball_records(args.records)
    predictions = cs.load_predictions(args.predictions)
    model_shots, unmatched = cs.join_predictions(records, predictions)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    unmatched_rows = ["match_id,over,ball,label,score"]
    for p in unmatched:
        unmatched_rows.append(
            f"{p.match_id},{p.over_number},{p.ball},{p.label.value},{p.score!r}"
        )
    (out_dir / "unmatched.csv").write_text("\n".join(unmatched_rows) + "\n",
                                           encoding="utf-8")

    if args.truth:
        truth_preds = cs.load_predictions(args.truth)
        ref_shots, _ = cs.join_predictions(
            records, truth_preds, source=cs.ShotSource.GROUND_TRUTH
        )
        ref_tag = "truth"
    else:
        ref_shots = cs.heuristic_shots(records)
        ref_tag = "heuristic"

    ref_pair = (
        cs.region_distribution(ref_shots, ShotLabel.HIGH),
        cs.region_distribution(ref_shots, ShotLabel.LOW),
    )
    ref_labels = _label_map(ref_shots)
    ref_table = cs.proportion_table(ref_shots)

    methods: list[tuple[str, list]] = [
        ("random", _baseline_shots(cs.BaselineKind.RANDOM, records, seed)),
        ("runs_approx", _baseline_shots(cs.BaselineKind.RUNS_APPROX, records, seed)),
        ("model", model_shots),
    ]
    report_rows = ["method,accuracy_pct,dist_deviation,avg_proportion_deviation"]
    text_lines = [
        f"reference: {ref_tag}",
        f"{'method':<12} {'acc%':>6} {'dist.dev':>9} {'prop.dev':>9}",
    ]
    for name, shots in methods:
        pair = (
            cs.region_distribution(shots, ShotLabel.HIGH),
            cs.region_distribution(shots, ShotLabel.LOW),
        )
        dist_dev = cs.distribution_deviation(pair, ref_pair)
        prop_dev = cs.avg_proportion_deviation(ref_table, cs.proportion_table(shots))
        acc = 100.0 * cs.prediction_accuracy(_label_map(shots), ref_labels)
        report_rows.append(f"{name},{acc!r},{dist_dev!r},{prop_dev!r}")
        text_lines.append(f"{name:<12} {acc:>6.1f} {dist_dev:>9.2f} {prop_dev:>9.1f}")
    (out_dir / "deviations.csv").write_text("\n".join(report_rows) + "\n",
                                            encoding="utf-8")
    (out_dir / "deviations.txt").write_text("\n".join(text_lines) + "\n",
                                            encoding="utf-8")

    prop_rows = ["region,total,ref_high_ratio,model_high_ratio"]
    model_table = cs.proportion_table(model_shots)
    for region in REGIONS:
        rh, _, n_ref = ref_table.rows[region]
        mh, _, _ = model_table.rows[region]
        prop_rows.append(f"{region.value},{n_ref},{rh!r},{mh!r}")
    (out_dir / "proportions.csv").write_text("\n".join(prop_rows) + "\n",
                                             encoding="utf-8")

    phase_rows = ["id,over_range,low,high"]
    for row in cs.summarize_phases(model_shots):
        phase_rows.append(f"{row['id']},{row['over_range']},{row['low']},{row['high']}")
    (out_dir / "phases.csv").write_text("\n".join(phase_rows) + "\n", encoding="utf-8")

    bowler_rows = ["bowler,runs,high,low,balls"]
    for row in cs.summarize_by_bowler(model_shots, records):
        bowler_rows.append(
            f"{row['bowler']},{row['runs']},{row['high']},{row['low']},{row['balls']}"
        )
    (out_dir / "bowlers.csv").write_text("\n".join(bowler_rows) + "\n", encoding="utf-8")

    _write_wheels(out_dir, "model", model_shots)
    _write_wheels(out_dir, ref_tag, ref_shots)
    print("\n".join(text_lines))
    return 0


def _baseline_shots(kind, records, seed):
    labels = cs.baseline_predict(kind, records, seed=seed)
    source = (
        cs.ShotSource.RANDOM_BASELINE
        if kind is cs.BaselineKind.RANDOM
        else cs.ShotSource.RUNS_BASELINE
    )
    shots = []
    for rec in records:
        label = labels.get(rec.key)
        if label is None:
            continue
        shots.append(
            cs.EnergyShot(
                match_id=rec.match_id,
                over_number=rec.over_number,
                ball=rec.ball_in_over,
                region=rec.region,
                energy=label,
                source=source,
            )
        )
    return shots


def cmd_plot(args) -> int:
    lines = Path(args.distribution).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != "region,percentage":
        raise ShotIntentError(
            f"{args.distribution}: expected header 'region,percentage'"
        )
    shares = {region: 0.0 for region in REGIONS}
    for line in lines[1:]:
        if not line.strip():
            continue
        region_s, _, pct_s = line.partition(",")
        shares[parse_region(region_s)] = float(pct_s)
    dist = cs.RegionDistribution(shares=shares)
    svg = render_wagon_wheel(dist, title=args.title)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shotintent",
        description="Shot-intent classification toolkit for pose time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=False):
        p.add_argument("--config", help="JSON config file with flat dotted keys")
        p.add_argument("--seed", type=int, help="master seed (overrides config/env)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key")
        if workers:
            p.add_argument("--workers", type=int, help="parallel CV workers")

    p = sub.add_parser("inspect", help="print per-folder high/low clip counts")
    p.add_argument("data", help="dataset root directory")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("train", help="train one model on the dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=sorted(_MODEL_FLAGS))
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--val-folder", help="folder held out for early stopping")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="ordered leave-pair-out cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=sorted(_MODEL_FLAGS))
    p.add_argument("--out-dir", required=True)
    common(p, workers=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="clip-length ablation over the CV")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=sorted(_MODEL_FLAGS))
    p.add_argument("--lengths", required=True, help="comma-separated caps")
    p.add_argument("--out-dir", required=True)
    common(p, workers=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("segment", help="extract shot clips from detection streams")
    p.add_argument("--detections", required=True, help="JSONL detection stream")
    p.add_argument("--out", required=True, help="clip CSV to write")
    p.add_argument("--region", help="batter region as x_min,x_max,y_min,y_max")
    p.add_argument("--band", help="tracking band as x_min,x_max")
    p.add_argument("--dwell", type=int, default=seg.DEFAULT_DWELL)
    p.add_argument("--gap-max", type=int, default=seg.DEFAULT_GAP_MAX)
    p.add_argument("--conf-min", type=float, default=seg.DEFAULT_CONF_MIN)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("case-study", help="weak-supervision comparison report")
    p.add_argument("--records", required=True, help="ball-by-ball CSV")
    p.add_argument("--predictions", required=True, help="predictions CSV")
    p.add_argument("--truth", help="ground-truth labels CSV (predictions schema)")
    p.add_argument("--out-dir", required=True)
    common(p)
    p.set_defaults(func=cmd_case_study)

    p = sub.add_parser("plot", help="render a region distribution as an SVG wheel")
    p.add_argument("--distribution", required=True, help="CSV region,percentage")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="shot region distribution")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ShotIntentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
