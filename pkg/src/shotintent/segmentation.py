"""Shot clip boundaries from per-frame person-detection box streams.

A shot starts when some detection sits inside the batter region for
``dwell`` consecutive frames, and runs while the tracked box (nearest
center to the previous one) stays inside a fixed-width horizontal band;
leaving the band ends the clip. Detector flicker up to ``gap_max`` missed
frames is tolerated.

Input streams are JSON-lines files, one detection per line:
``{"frame": int, "x": f, "y": f, "w": f, "h": f, "conf": f}`` with
normalized coordinates (x, y is the box corner nearest the origin).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedRow, NoBatterFound, TrackLost

DEFAULT_DWELL = 5
DEFAULT_GAP_MAX = 5
DEFAULT_CONF_MIN = 0.5

# batter near lower center of the broadcast frame at delivery
DEFAULT_BATTER_REGION = (0.40, 0.60, 0.55, 0.85)
DEFAULT_TRACK_BAND = (0.25, 0.75)


@dataclass(frozen=True)
class DetectionBox:
    frame_index: int
    x: float
    y: float
    w: float
    h: float
    confidence: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


@dataclass(frozen=True)
class BatterRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def contains(self, cx: float, cy: float) -> bool:
        return self.x_min <= cx <= self.x_max and self.y_min <= cy <= self.y_max


@dataclass(frozen=True)
class ClipBounds:
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError(f"clip bounds reversed: {self}")


def load_detections(path: str | Path) -> dict[int, list[DetectionBox]]:
    """Parse a JSONL detection stream into per-frame box lists."""
    frames: dict[int, list[DetectionBox]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                box = DetectionBox(
                    frame_index=int(obj["frame"]),
                    x=float(obj["x"]),
                    y=float(obj["y"]),
                    w=float(obj["w"]),
                    h=float(obj["h"]),
                    confidence=float(obj["conf"]),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise MalformedRow(f"{path}: line {line_no}: {exc}")
            frames.setdefault(box.frame_index, []).append(box)
    return frames


def _filtered(stream: dict[int, list[DetectionBox]], conf_min: float):
    return {
        f: [b for b in boxes if b.confidence >= conf_min]
        for f, boxes in stream.items()
    }


def find_shot_start(
    stream: dict[int, list[DetectionBox]],
    region: BatterRegion,
    dwell: int = DEFAULT_DWELL,
    conf_min: float = DEFAULT_CONF_MIN,
    search_from: int = 0,
) -> int:
    """First frame opening a run of ``dwell`` consecutive frames with some
    box center inside ``region``."""
    if not stream:
        raise NoBatterFound("empty detection stream")
    boxes = _filtered(stream, conf_min)
    last = max(boxes)
    run = 0
    for frame in range(search_from, last + 1):
        hit = any(region.contains(*b.center) for b in boxes.get(frame, ()))
        run = run + 1 if hit else 0
        if run >= dwell:
            return frame - dwell + 1
    raise NoBatterFound(
        f"no {dwell}-frame dwell inside the batter region from frame {search_from}"
    )


def _nearest(boxes: list[DetectionBox], cx: float, cy: float) -> DetectionBox:
    return min(boxes, key=lambda b: (b.center[0] - cx) ** 2 + (b.center[1] - cy) ** 2)


def track_until_exit(
    stream: dict[int, list[DetectionBox]],
    start: int,
    track_band: tuple[float, float] = DEFAULT_TRACK_BAND,
    gap_max: int = DEFAULT_GAP_MAX,
    conf_min: float = DEFAULT_CONF_MIN,
    seed_center: tuple[float, float] = (0.5, 0.5),
) -> ClipBounds:
    """Follow the nearest-center box from ``start`` until it leaves the band.

    Tracking seeds from the box nearest ``seed_center`` at the start frame
    and thereafter follows the box nearest the previous center. The clip
    ends at the last frame whose tracked center is inside [x_min, x_max].
    Raises TrackLost (carrying the partial bounds) when more than gap_max
    consecutive frames offer no candidate.
    """
    boxes = _filtered(stream, conf_min)
    if not boxes.get(start):
        raise NoBatterFound(f"no detections at start frame {start}")
    x_lo, x_hi = track_band
    cx, cy = _nearest(boxes[start], *seed_center).center
    if not x_lo <= cx <= x_hi:
        raise NoBatterFound(f"start-frame center {cx:.3f} already outside the band")

    last_frame = max(boxes)
    last_inside = start
    gap = 0
    for frame in range(start + 1, last_frame + 1):
        candidates = boxes.get(frame, ())
        if not candidates:
            gap += 1
            if gap > gap_max:
                raise TrackLost(
                    f"no detections for {gap} frames after {last_inside}",
                    start_frame=start,
                    last_tracked_frame=last_inside,
                    lost_at_frame=frame,
                )
            continue
        gap = 0
        cx, cy = _nearest(candidates, cx, cy).center
        if not x_lo <= cx <= x_hi:
            return ClipBounds(start, last_inside)
        last_inside = frame
    return ClipBounds(start, last_inside)


def extract_clips(
    stream: dict[int, list[DetectionBox]],
    region: BatterRegion | None = None,
    track_band: tuple[float, float] = DEFAULT_TRACK_BAND,
    dwell: int = DEFAULT_DWELL,
    gap_max: int = DEFAULT_GAP_MAX,
    conf_min: float = DEFAULT_CONF_MIN,
) -> list[ClipBounds]:
    """All non-overlapping shot clips in the stream, sorted by start.

    A lost track closes the clip at its last good frame and scanning
    resumes past the loss point.
    """
    if region is None:
        region = BatterRegion(*DEFAULT_BATTER_REGION)
    clips: list[ClipBounds] = []
    if not stream:
        return clips
    search_from = 0
    last = max(stream)
    while search_from <= last:
        try:
            start = find_shot_start(
                stream, region, dwell=dwell, conf_min=conf_min, search_from=search_from
            )
        except NoBatterFound:
            break
        seed = (
            0.5 * (region.x_min + region.x_max),
            0.5 * (region.y_min + region.y_max),
        )
        try:
            bounds = track_until_exit(
                stream,
                start,
                track_band=track_band,
                gap_max=gap_max,
                conf_min=conf_min,
                seed_center=seed,
            )
            resume = bounds.end_frame + 1
        except TrackLost as lost:
            bounds = ClipBounds(start, lost.last_tracked_frame)
            resume = lost.lost_at_frame + 1
        except NoBatterFound:
            bounds = ClipBounds(start, start)
            resume = start + 1
        clips.append(bounds)
        search_from = max(resume, bounds.end_frame + 1)
    return clips


def clips_to_csv(clips: list[ClipBounds], prefix: str = "clip") -> str:
    rows = ["clip_id,start_frame,end_frame"]
    for i, c in enumerate(clips):
        rows.append(f"{prefix}{i:03d},{c.start_frame},{c.end_frame}")
    return "\n".join(rows) + "\n"
