"""Dataset schema and loaders: pose clips, folder-structured labels, ball-by-ball stats.

Pose CSVs use the wide 33-landmark layout of common pose estimators
(header ``frame,x0,y0,z0,v0,...,x32,y32,z32,v32``), one row per frame.
Labels come from ``<folder>/high/*.csv`` and ``<folder>/low/*.csv`` subtrees.
Ball-by-ball CSVs use the header ``match_id,over,ball,batter,bowler,runs,region``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    CoordinateOutOfRange,
    EmptyClip,
    EmptyFolder,
    MalformedHeader,
    MalformedRow,
    NegativeRuns,
    NonMonotonicFrames,
    UnknownRegion,
)

N_LANDMARKS = 33

POSE_HEADER = "frame," + ",".join(
    f"x{i},y{i},z{i},v{i}" for i in range(N_LANDMARKS)
)

BALL_HEADER = "match_id,over,ball,batter,bowler,runs,region"

_OVER_SUFFIX = re.compile(r"_over(\d+)$")


class ShotLabel(Enum):
    HIGH = "high"
    LOW = "low"


class FieldRegion(Enum):
    COVER = "cover"
    FINE_LEG = "fine leg"
    MID_OFF = "mid off"
    MID_ON = "mid on"
    MID_WICKET = "mid wicket"
    POINT = "point"
    SQUARE_LEG = "square leg"
    THIRD_MAN = "third man"


#: Canonical region iteration order (Table layout order used in reports).
REGIONS = (
    FieldRegion.COVER,
    FieldRegion.FINE_LEG,
    FieldRegion.MID_OFF,
    FieldRegion.MID_ON,
    FieldRegion.MID_WICKET,
    FieldRegion.POINT,
    FieldRegion.SQUARE_LEG,
    FieldRegion.THIRD_MAN,
)


@dataclass(frozen=True)
class PoseFrame:
    """One observed frame: 33 landmarks of (x, y, z, visibility)."""

    frame_index: int
    landmarks: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        if len(self.landmarks) != N_LANDMARKS:
            raise MalformedRow(
                f"frame {self.frame_index}: expected {N_LANDMARKS} landmarks, "
                f"got {len(self.landmarks)}"
            )


@dataclass
class PoseSequence:
    """One shot clip: ordered frames plus clip metadata."""

    frames: list[PoseFrame]
    clip_id: str
    folder_id: str = ""
    label: ShotLabel | None = None
    over_number: int | None = None

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class FoldedDataset:
    """Labeled pose sequences grouped by match folder (the CV unit)."""

    folders: dict[str, list[PoseSequence]]

    def folder_ids(self) -> list[str]:
        return sorted(self.folders)

    def counts(self) -> dict[str, tuple[int, int]]:
        """Per-folder (high, low) clip counts."""
        out = {}
        for fid in self.folder_ids():
            seqs = self.folders[fid]
            high = sum(1 for s in seqs if s.label is ShotLabel.HIGH)
            out[fid] = (high, len(seqs) - high)
        return out

    def total_counts(self) -> tuple[int, int]:
        high = low = 0
        for h, l in self.counts().values():
            high += h
            low += l
        return high, low


@dataclass(frozen=True)
class BallRecord:
    """One delivery from ball-by-ball match statistics."""

    match_id: str
    over_number: int
    ball_in_over: int
    batter: str
    bowler: str
    runs: int
    region: FieldRegion

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.match_id, self.over_number, self.ball_in_over)


def _parse_float(token: str, path: Path, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MalformedRow(f"{path}: line {line_no}: non-numeric value {token!r}")


def load_pose_csv(path: str | Path) -> PoseSequence:
    """Load and validate one pose clip.

    The clip id is the file stem; an ``_over<N>`` stem suffix, when present,
    is parsed into ``over_number``. The label is left unset.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != POSE_HEADER:
        raise MalformedHeader(f"{path}: header does not match pose-CSV schema")

    frames: list[PoseFrame] = []
    prev_index = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split(",")
        if len(tokens) != 1 + 4 * N_LANDMARKS:
            raise MalformedRow(
                f"{path}: line {line_no}: expected {1 + 4 * N_LANDMARKS} fields, "
                f"got {len(tokens)}"
            )
        try:
            frame_index = int(tokens[0])
        except ValueError:
            raise MalformedRow(f"{path}: line {line_no}: bad frame index {tokens[0]!r}")
        if prev_index is not None and frame_index <= prev_index:
            raise NonMonotonicFrames(
                f"{path}: line {line_no}: frame {frame_index} after {prev_index}"
            )
        prev_index = frame_index

        values = [_parse_float(t, path, line_no) for t in tokens[1:]]
        landmarks = []
        for i in range(N_LANDMARKS):
            x, y, z, v = values[4 * i : 4 * i + 4]
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise CoordinateOutOfRange(
                    f"{path}: line {line_no}: landmark {i} at ({x}, {y}) "
                    "outside the unit square"
                )
            if not (0.0 <= v <= 1.0):
                raise CoordinateOutOfRange(
                    f"{path}: line {line_no}: landmark {i} visibility {v} not in [0,1]"
                )
            landmarks.append((x, y, z, v))
        frames.append(PoseFrame(frame_index, tuple(landmarks)))

    if not frames:
        raise EmptyClip(f"{path}: no frames")

    stem = path.stem
    over = None
    m = _OVER_SUFFIX.search(stem)
    if m:
        over = int(m.group(1))
    return PoseSequence(frames=frames, clip_id=stem, over_number=over)


def write_pose_csv(seq: PoseSequence, path: str | Path) -> None:
    """Write a clip in the pose-CSV schema; inverse of load_pose_csv."""
    path = Path(path)
    rows = [POSE_HEADER]
    for frame in seq.frames:
        cells = [str(frame.frame_index)]
        for x, y, z, v in frame.landmarks:
            cells.extend((repr(x), repr(y), repr(z), repr(v)))
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_dataset(root: str | Path) -> FoldedDataset:
    """Load every folder under ``root`` with high/ and low/ labeled subtrees.

    Per-file failures are re-raised with the file path in the message; a
    folder that yields no usable clips raises EmptyFolder.
    """
    root = Path(root)
    folders: dict[str, list[PoseSequence]] = {}
    for folder in sorted(p for p in root.iterdir() if p.is_dir()):
        seqs: list[PoseSequence] = []
        for sub, label in (("high", ShotLabel.HIGH), ("low", ShotLabel.LOW)):
            subdir = folder / sub
            if not subdir.is_dir():
                continue
            for csv_path in sorted(subdir.glob("*.csv")):
                try:
                    seq = load_pose_csv(csv_path)
                except Exception as exc:
                    raise type(exc)(f"{csv_path}: {exc}") from exc
                seq.folder_id = folder.name
                seq.label = label
                seqs.append(seq)
        if not seqs:
            raise EmptyFolder(f"{folder}: no usable clips")
        folders[folder.name] = seqs
    return FoldedDataset(folders=folders)


def parse_region(token: str) -> FieldRegion:
    name = token.strip().lower()
    try:
        return FieldRegion(name)
    except ValueError:
        raise UnknownRegion(f"unknown field region {token!r}")


def load_ball_records(path: str | Path) -> list[BallRecord]:
    """Load a ball-by-ball CSV in file order."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != BALL_HEADER:
        raise MalformedHeader(f"{path}: header does not match ball-by-ball schema")

    records: list[BallRecord] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = [t.strip() for t in line.split(",")]
        if len(tokens) != 7:
            raise MalformedRow(f"{path}: line {line_no}: expected 7 fields")
        match_id, over_s, ball_s, batter, bowler, runs_s, region_s = tokens
        try:
            over = int(over_s)
            ball = int(ball_s)
            runs = int(runs_s)
        except ValueError:
            raise MalformedRow(f"{path}: line {line_no}: non-integer over/ball/runs")
        if over < 0:
            raise MalformedRow(f"{path}: line {line_no}: negative over {over}")
        if not 1 <= ball <= 6:
            raise MalformedRow(f"{path}: line {line_no}: ball {ball} not in 1..6")
        if runs < 0:
            raise NegativeRuns(f"{path}: line {line_no}: runs {runs} < 0")
        try:
            region = parse_region(region_s)
        except UnknownRegion as exc:
            raise UnknownRegion(f"{path}: line {line_no}: {exc}")
        records.append(
            BallRecord(match_id, over, ball, batter, bowler, runs, region)
        )
    return records
