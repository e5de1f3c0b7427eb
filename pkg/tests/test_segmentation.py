import json

import numpy as np
import pytest

from shotintent.errors import MalformedRow, NoBatterFound, TrackLost
from shotintent.segmentation import (
    BatterRegion,
    ClipBounds,
    DetectionBox,
    extract_clips,
    find_shot_start,
    load_detections,
    track_until_exit,
)
from oracles import find_start_scan

REGION = BatterRegion(0.40, 0.60, 0.55, 0.85)
BAND = (0.25, 0.75)


def _box(frame, cx, cy, conf=0.9, size=0.08):
    return DetectionBox(frame, cx - size / 2, cy - size / 2, size, size, conf)


def _stream(boxes):
    out = {}
    for b in boxes:
        out.setdefault(b.frame_index, []).append(b)
    return out


def make_planted_stream(rng, n_shots, dwell=5, gap_frames=0):
    """Stream with known shot boundaries; returns (stream, [(start, end)])."""
    boxes = []
    truth = []
    frame = int(rng.integers(0, 5))
    for _ in range(n_shots):
        start = frame + int(rng.integers(3, 10))
        # lead-in: batter visible but outside the region
        for f in range(frame, start):
            boxes.append(_box(f, 0.70, 0.40))
        hold = int(rng.integers(dwell, dwell + 12))
        walk = int(rng.integers(2, 10))
        end = start + hold + walk - 1
        for i, f in enumerate(range(start, start + hold)):
            boxes.append(_box(f, 0.50 + 0.005 * (i % 3), 0.70))
        for i, f in enumerate(range(start + hold, end + 1)):
            # drifts toward the band edge but stays inside it
            boxes.append(_box(f, 0.60 + (0.74 - 0.60) * (i + 1) / (walk + 1), 0.70))
        if gap_frames:
            # knock out interior detections; the track must survive
            gap_at = start + dwell
            boxes = [
                b for b in boxes
                if not (gap_at <= b.frame_index < gap_at + gap_frames)
            ]
        # exit: outside the band for a few frames
        for f in range(end + 1, end + 4):
            boxes.append(_box(f, 0.85, 0.70))
        truth.append((start, end))
        frame = end + 4
    return _stream(boxes), truth


class TestFindShotStart:
    def test_immediate_dwell(self):
        stream = _stream([_box(f, 0.5, 0.7) for f in range(10)])
        assert find_shot_start(stream, REGION, dwell=3) == 0

    def test_entry_at_frame_seven(self):
        boxes = [_box(f, 0.9, 0.2) for f in range(7)]
        boxes += [_box(f, 0.5, 0.7) for f in range(7, 15)]
        assert find_shot_start(_stream(boxes), REGION, dwell=3) == 7

    def test_flicker_resets_dwell(self):
        boxes = [_box(0, 0.5, 0.7), _box(1, 0.5, 0.7)]  # gap at 2
        boxes += [_box(f, 0.5, 0.7) for f in range(3, 9)]
        assert find_shot_start(_stream(boxes), REGION, dwell=3) == 3

    def test_low_confidence_filtered(self):
        boxes = [_box(f, 0.5, 0.7, conf=0.2) for f in range(6)]
        boxes += [_box(f, 0.5, 0.7, conf=0.9) for f in range(6, 12)]
        assert find_shot_start(_stream(boxes), REGION, dwell=3, conf_min=0.5) == 6

    def test_no_batter(self):
        stream = _stream([_box(f, 0.9, 0.2) for f in range(20)])
        with pytest.raises(NoBatterFound):
            find_shot_start(stream, REGION, dwell=3)

    def test_matches_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(5, 40))
            dwell = int(rng.integers(1, 5))
            boxes = []
            hits = {}
            for f in range(n):
                if rng.random() < 0.5:
                    inside = rng.random() < 0.5
                    cx = 0.5 if inside else 0.9
                    boxes.append(_box(f, cx, 0.7))
                    hits[f] = inside
                else:
                    hits[f] = False
            expected = find_start_scan(hits, dwell)
            if expected is None:
                with pytest.raises(NoBatterFound):
                    find_shot_start(_stream(boxes), REGION, dwell=dwell)
            else:
                assert find_shot_start(_stream(boxes), REGION, dwell=dwell) == expected


class TestTrackUntilExit:
    def test_exit_boundary(self):
        boxes = []
        for f in range(10, 60):
            boxes.append(_box(f, 0.5, 0.7))
        boxes.append(_box(60, 0.9, 0.7))  # drifts out of band at frame 60
        bounds = track_until_exit(_stream(boxes), 10, track_band=BAND, gap_max=5)
        assert bounds == ClipBounds(10, 59)

    def test_follows_nearest_of_two_people(self):
        boxes = []
        for f in range(0, 30):
            boxes.append(_box(f, 0.50 + 0.002 * f, 0.70))  # batter, slow drift
            boxes.append(_box(f, 0.30, 0.30))              # fielder, static
        boxes.append(_box(30, 0.85, 0.70))
        boxes.append(_box(30, 0.30, 0.30))
        bounds = track_until_exit(
            _stream(boxes), 0, track_band=BAND, gap_max=5, seed_center=(0.5, 0.7)
        )
        assert bounds == ClipBounds(0, 29)

    def test_survives_short_gaps(self):
        boxes = [_box(f, 0.5, 0.7) for f in range(0, 10)]
        boxes += [_box(f, 0.5, 0.7) for f in range(13, 20)]  # 3-frame gap
        boxes.append(_box(20, 0.9, 0.7))
        bounds = track_until_exit(_stream(boxes), 0, track_band=BAND, gap_max=5)
        assert bounds == ClipBounds(0, 19)

    def test_track_lost_after_gap_budget(self):
        boxes = [_box(f, 0.5, 0.7) for f in range(0, 8)]
        boxes += [_box(f, 0.5, 0.7) for f in range(20, 25)]  # 12-frame gap
        with pytest.raises(TrackLost) as err:
            track_until_exit(_stream(boxes), 0, track_band=BAND, gap_max=5)
        assert err.value.last_tracked_frame == 7
        assert err.value.lost_at_frame == 13


class TestExtractClips:
    def test_two_planted_shots_recovered_exactly(self):
        rng = np.random.default_rng(1)
        stream, truth = make_planted_stream(rng, 2)
        clips = extract_clips(stream, REGION, BAND)
        assert [(c.start_frame, c.end_frame) for c in clips] == truth

    def test_empty_stream(self):
        assert extract_clips({}, REGION, BAND) == []

    def test_clips_never_overlap(self):
        rng = np.random.default_rng(2)
        stream, _ = make_planted_stream(rng, 4)
        clips = extract_clips(stream, REGION, BAND)
        for a, b in zip(clips, clips[1:]):
            assert a.end_frame < b.start_frame

    def test_fuzz_recovery_is_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n_shots = int(rng.integers(1, 4))
            stream, truth = make_planted_stream(rng, n_shots)
            clips = extract_clips(stream, REGION, BAND)
            assert [(c.start_frame, c.end_frame) for c in clips] == truth

    def test_gap_tolerant_recovery(self):
        rng = np.random.default_rng(4)
        stream, truth = make_planted_stream(rng, 1, gap_frames=3)
        clips = extract_clips(stream, REGION, BAND)
        assert [(c.start_frame, c.end_frame) for c in clips] == truth


class TestLoadDetections:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "d.jsonl"
        rows = [
            {"frame": 0, "x": 0.1, "y": 0.2, "w": 0.05, "h": 0.1, "conf": 0.9},
            {"frame": 0, "x": 0.4, "y": 0.5, "w": 0.05, "h": 0.1, "conf": 0.8},
            {"frame": 2, "x": 0.3, "y": 0.3, "w": 0.05, "h": 0.1, "conf": 0.7},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        stream = load_detections(path)
        assert set(stream) == {0, 2}
        assert len(stream[0]) == 2
        assert stream[2][0].confidence == 0.7

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"frame": 0, "x": 0.1}\n')
        with pytest.raises(MalformedRow):
            load_detections(path)
