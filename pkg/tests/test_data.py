import numpy as np
import pytest

from shotintent.data import (
    BALL_HEADER,
    POSE_HEADER,
    FieldRegion,
    ShotLabel,
    load_ball_records,
    load_dataset,
    load_pose_csv,
    write_pose_csv,
)
from shotintent.errors import (
    CoordinateOutOfRange,
    EmptyClip,
    EmptyFolder,
    MalformedHeader,
    NegativeRuns,
    NonMonotonicFrames,
    UnknownRegion,
)
from synthdata import make_pose_sequence

# per-folder (high, low) clip counts of the released dataset
CSID_COUNTS = [
    (120, 52), (75, 12), (59, 28), (187, 44), (29, 102), (17, 108),
    (105, 81), (452, 733), (87, 80), (86, 65), (18, 71),
]

REGION_TOTALS = {
    "cover": 143, "fine leg": 46, "mid off": 273, "mid on": 183,
    "mid wicket": 152, "point": 117, "square leg": 50, "third man": 65,
}


def _row(frame, x=0.5, y=0.5, z=0.0, v=1.0):
    return f"{frame}," + ",".join(f"{x},{y},{z},{v}" for _ in range(33))


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadPoseCsv:
    def test_well_formed_file_loads_every_frame(self, tmp_path):
        lines = [POSE_HEADER] + [_row(i) for i in range(50)]
        seq = load_pose_csv(_write(tmp_path, "clip.csv", lines))
        assert len(seq.frames) == 50
        assert seq.clip_id == "clip"
        assert seq.label is None

    def test_non_monotonic_frames_rejected(self, tmp_path):
        lines = [POSE_HEADER] + [_row(i) for i in (0, 1, 1, 2)]
        with pytest.raises(NonMonotonicFrames):
            load_pose_csv(_write(tmp_path, "bad.csv", lines))

    def test_bad_header_rejected(self, tmp_path):
        path = _write(tmp_path, "bad.csv", ["frame,x0", _row(0)])
        with pytest.raises(MalformedHeader):
            load_pose_csv(path)

    def test_coordinate_out_of_range(self, tmp_path):
        lines = [POSE_HEADER, _row(0, x=1.5)]
        with pytest.raises(CoordinateOutOfRange):
            load_pose_csv(_write(tmp_path, "bad.csv", lines))

    def test_visibility_out_of_range(self, tmp_path):
        lines = [POSE_HEADER, _row(0, v=1.2)]
        with pytest.raises(CoordinateOutOfRange):
            load_pose_csv(_write(tmp_path, "bad.csv", lines))

    def test_empty_clip(self, tmp_path):
        with pytest.raises(EmptyClip):
            load_pose_csv(_write(tmp_path, "empty.csv", [POSE_HEADER]))

    def test_over_number_parsed_from_stem(self, tmp_path):
        lines = [POSE_HEADER, _row(0)]
        seq = load_pose_csv(_write(tmp_path, "shot_over23.csv", lines))
        assert seq.over_number == 23
        seq = load_pose_csv(_write(tmp_path, "shot_plain.csv", lines))
        assert seq.over_number is None

    def test_three_frame_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        seq = make_pose_sequence(rng, 3, amplitude=0.08, clip_id="rt")
        path = tmp_path / "rt.csv"
        write_pose_csv(seq, path)
        loaded = load_pose_csv(path)
        assert len(loaded.frames) == 3
        for orig, back in zip(seq.frames, loaded.frames):
            assert back.frame_index == orig.frame_index
            assert back.landmarks == orig.landmarks  # exact equality

    def test_round_trip_property_random_clips(self, tmp_path):
        rng = np.random.default_rng(11)
        for i in range(10):
            seq = make_pose_sequence(
                rng, int(rng.integers(1, 30)), amplitude=0.1, clip_id=f"c{i}"
            )
            path = tmp_path / f"c{i}.csv"
            write_pose_csv(seq, path)
            loaded = load_pose_csv(path)
            for orig, back in zip(seq.frames, loaded.frames):
                assert back.landmarks == orig.landmarks


def _make_tree(tmp_path, folder_specs):
    """folder_specs: {folder: (n_high, n_low)}; 1-frame clips."""
    content = "\n".join([POSE_HEADER, _row(0)]) + "\n"
    for folder, (n_high, n_low) in folder_specs.items():
        for sub, n in (("high", n_high), ("low", n_low)):
            d = tmp_path / folder / sub
            d.mkdir(parents=True, exist_ok=True)
            for i in range(n):
                (d / f"clip{i:04d}.csv").write_text(content)


class TestLoadDataset:
    def test_structure_mirrored(self, tmp_path):
        _make_tree(tmp_path, {"f1": (3, 2), "f2": (3, 2)})
        ds = load_dataset(tmp_path)
        assert ds.counts() == {"f1": (3, 2), "f2": (3, 2)}
        for seqs in ds.folders.values():
            assert all(s.label in (ShotLabel.HIGH, ShotLabel.LOW) for s in seqs)

    def test_csid_layout_counts_match_reference_table(self, tmp_path):
        specs = {
            f"folder_{i + 1:02d}": counts for i, counts in enumerate(CSID_COUNTS)
        }
        _make_tree(tmp_path, specs)
        ds = load_dataset(tmp_path)
        counts = ds.counts()
        assert counts["folder_01"] == (120, 52)
        for i, expected in enumerate(CSID_COUNTS):
            assert counts[f"folder_{i + 1:02d}"] == expected
        assert ds.total_counts() == (1235, 1376)

    def test_unreadable_file_fails_loudly_with_path(self, tmp_path):
        _make_tree(tmp_path, {"f1": (2, 1)})
        bad = tmp_path / "f1" / "high" / "zzz_corrupt.csv"
        bad.write_text("not,a,header\n1,2,3\n")
        with pytest.raises(MalformedHeader) as err:
            load_dataset(tmp_path)
        assert "zzz_corrupt.csv" in str(err.value)

    def test_empty_folder_rejected(self, tmp_path):
        _make_tree(tmp_path, {"f1": (1, 1)})
        (tmp_path / "f2" / "high").mkdir(parents=True)
        with pytest.raises(EmptyFolder):
            load_dataset(tmp_path)

    def test_label_counts_preserved(self, tmp_path):
        _make_tree(tmp_path, {"fa": (4, 1), "fb": (0, 3)})
        ds = load_dataset(tmp_path)
        total = sum(len(v) for v in ds.folders.values())
        assert total == 8
        assert ds.total_counts() == (4, 4)


class TestLoadBallRecords:
    def test_field_mapping(self, tmp_path):
        path = _write(tmp_path, "b.csv", [BALL_HEADER, "m1,12,3,Kohli,Rabada,4,cover"])
        records = load_ball_records(path)
        assert len(records) == 1
        r = records[0]
        assert (r.match_id, r.over_number, r.ball_in_over) == ("m1", 12, 3)
        assert (r.batter, r.bowler, r.runs) == ("Kohli", "Rabada", 4)
        assert r.region is FieldRegion.COVER

    def test_region_normalized_to_lowercase(self, tmp_path):
        path = _write(tmp_path, "b.csv", [BALL_HEADER, "m1,1,1,A,B,0,Fine Leg"])
        assert load_ball_records(path)[0].region is FieldRegion.FINE_LEG

    def test_unknown_region_rejected(self, tmp_path):
        path = _write(tmp_path, "b.csv", [BALL_HEADER, "m1,1,1,A,B,0,Cover Drive"])
        with pytest.raises(UnknownRegion):
            load_ball_records(path)

    def test_negative_runs_rejected(self, tmp_path):
        path = _write(tmp_path, "b.csv", [BALL_HEADER, "m1,1,1,A,B,-1,cover"])
        with pytest.raises(NegativeRuns):
            load_ball_records(path)

    def test_per_region_totals_match_reference_counts(self, tmp_path):
        lines = [BALL_HEADER]
        i = 0
        for region, n in REGION_TOTALS.items():
            for _ in range(n):
                over, ball = divmod(i, 6)
                lines.append(f"m{i // 300},{over % 50},{ball + 1},Bat,Bowl,1,{region}")
                i += 1
        records = load_ball_records(_write(tmp_path, "b.csv", lines))
        assert len(records) == sum(REGION_TOTALS.values()) == 1029
        for region, n in REGION_TOTALS.items():
            assert sum(1 for r in records if r.region.value == region) == n
