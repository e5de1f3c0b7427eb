import numpy as np
import pytest

from shotintent.casestudy import (
    BaselineKind,
    EnergyShot,
    PredictionRecord,
    ProportionTable,
    RegionDistribution,
    ShotSource,
    avg_proportion_deviation,
    baseline_predict,
    distribution_deviation,
    heuristic_energy,
    heuristic_shots,
    join_predictions,
    load_predictions,
    prediction_accuracy,
    proportion_table,
    region_distribution,
    summarize_by_bowler,
    summarize_phases,
)
from shotintent.data import REGIONS, BallRecord, FieldRegion, ShotLabel
from shotintent.errors import DuplicateOverKey, RegionMismatch

# single-batter 14-match proportion columns (region, count, true, model)
PROPORTION_ROWS = [
    (FieldRegion.COVER, 143, 0.48, 0.53),
    (FieldRegion.FINE_LEG, 46, 0.33, 0.22),
    (FieldRegion.MID_OFF, 273, 0.32, 0.33),
    (FieldRegion.MID_ON, 183, 0.37, 0.41),
    (FieldRegion.MID_WICKET, 152, 0.43, 0.38),
    (FieldRegion.POINT, 117, 0.39, 0.50),
    (FieldRegion.SQUARE_LEG, 50, 0.38, 0.42),
    (FieldRegion.THIRD_MAN, 65, 0.34, 0.38),
]


def _record(match="m1", over=1, ball=1, batter="Bat", bowler="Bowl", runs=0,
            region=FieldRegion.COVER):
    return BallRecord(match, over, ball, batter, bowler, runs, region)


def _shot(over=0, ball=1, region=FieldRegion.COVER, energy=ShotLabel.HIGH,
          match="m1", source=ShotSource.MODEL_PREDICTION):
    return EnergyShot(match, over, ball, region, energy, source)


class TestHeuristicEnergy:
    def test_four_runs_is_high(self):
        assert heuristic_energy(4) is ShotLabel.HIGH

    def test_zero_runs_is_low(self):
        assert heuristic_energy(0) is ShotLabel.LOW

    def test_two_runs_excluded(self):
        assert heuristic_energy(2) is None

    def test_exhaustive_partition(self):
        for runs in range(0, 20):
            label = heuristic_energy(runs)
            if runs <= 1:
                assert label is ShotLabel.LOW
            elif runs == 2:
                assert label is None
            else:
                assert label is ShotLabel.HIGH


class TestJoinPredictions:
    def _preds(self, n, match="m1"):
        return [
            PredictionRecord(match, i // 6, i % 6 + 1, ShotLabel.HIGH, 0.9)
            for i in range(n)
        ]

    def _records(self, n, match="m1"):
        return [
            _record(match, i // 6, i % 6 + 1, runs=4)
            for i in range(n)
        ]

    def test_full_join(self):
        joined, unmatched = join_predictions(self._records(5), self._preds(5))
        assert len(joined) == 5 and not unmatched
        assert all(s.region is FieldRegion.COVER for s in joined)

    def test_partial_join_reports_unmatched(self):
        joined, unmatched = join_predictions(self._records(4), self._preds(5))
        assert len(joined) == 4
        assert len(unmatched) == 1
        assert unmatched[0].key == ("m1", 0, 5)

    def test_shuffled_inputs_join_identically(self):
        rng = np.random.default_rng(0)
        records, preds = self._records(30), self._preds(30)
        joined1, _ = join_predictions(records, preds)
        records2 = [records[i] for i in rng.permutation(30)]
        preds2 = [preds[i] for i in rng.permutation(30)]
        joined2, _ = join_predictions(records2, preds2)
        assert sorted(joined1, key=lambda s: s.key) == sorted(
            joined2, key=lambda s: s.key
        )

    def test_duplicate_key_rejected(self):
        records = self._records(3) + [self._records(1)[0]]
        with pytest.raises(DuplicateOverKey):
            join_predictions(records, self._preds(3))


class TestRegionDistribution:
    def test_point_mass(self):
        shots = [_shot(over=i) for i in range(10)]
        dist = region_distribution(shots, ShotLabel.HIGH)
        assert dist.shares[FieldRegion.COVER] == 100.0
        assert sum(dist.shares.values()) == 100.0

    def test_uniform_pair(self):
        shots = [
            _shot(over=0, region=FieldRegion.COVER),
            _shot(over=1, region=FieldRegion.COVER),
            _shot(over=2, region=FieldRegion.POINT),
            _shot(over=3, region=FieldRegion.POINT),
        ]
        dist = region_distribution(shots, ShotLabel.HIGH)
        assert dist.shares[FieldRegion.COVER] == 50.0
        assert dist.shares[FieldRegion.POINT] == 50.0

    def test_empty_class_is_all_zero(self):
        dist = region_distribution([], ShotLabel.HIGH)
        assert all(v == 0.0 for v in dist.shares.values())

    def test_matches_counting_oracle(self):
        rng = np.random.default_rng(1)
        regions = list(REGIONS)
        for _ in range(20):
            shots = [
                _shot(over=i, region=regions[rng.integers(0, 8)],
                      energy=ShotLabel.HIGH if rng.random() < 0.5 else ShotLabel.LOW)
                for i in range(int(rng.integers(1, 80)))
            ]
            for cls in (ShotLabel.HIGH, ShotLabel.LOW):
                n_cls = sum(1 for s in shots if s.energy is cls)
                dist = region_distribution(shots, cls)
                for region in regions:
                    count = sum(
                        1 for s in shots if s.energy is cls and s.region is region
                    )
                    expected = 0.0 if n_cls == 0 else 100.0 * count / n_cls
                    assert dist.shares[region] == pytest.approx(expected)


def _dist(values):
    return RegionDistribution(shares=dict(zip(REGIONS, values)))


def _random_dist(rng):
    raw = rng.random(8) + 1e-3
    return _dist(100.0 * raw / raw.sum())


class TestDistributionDeviation:
    def test_identity(self):
        pair = (_dist([100, 0, 0, 0, 0, 0, 0, 0]), _dist([0, 0, 0, 0, 0, 0, 0, 100]))
        assert distribution_deviation(pair, pair) == 0.0

    def test_two_region_shift(self):
        a_high = _dist([60, 40, 0, 0, 0, 0, 0, 0])
        b_high = _dist([50, 50, 0, 0, 0, 0, 0, 0])
        low = _dist([0, 0, 0, 0, 0, 0, 0, 100])
        assert distribution_deviation((a_high, low), (b_high, low)) == pytest.approx(20.0)

    def test_metric_properties(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            a = (_random_dist(rng), _random_dist(rng))
            b = (_random_dist(rng), _random_dist(rng))
            c = (_random_dist(rng), _random_dist(rng))
            dab = distribution_deviation(a, b)
            assert dab >= 0.0
            assert distribution_deviation(b, a) == pytest.approx(dab)
            assert distribution_deviation(a, a) == 0.0
            assert dab <= (
                distribution_deviation(a, c) + distribution_deviation(c, b) + 1e-9
            )


class TestProportionTable:
    def test_complement_identity_from_ratios(self):
        table = ProportionTable.from_ratios({FieldRegion.COVER: 0.48},
                                            {FieldRegion.COVER: 143})
        high, low, n = table.rows[FieldRegion.COVER]
        assert (high, n) == (0.48, 143)
        assert low == pytest.approx(0.52)

    def test_singleton_region(self):
        table = proportion_table([_shot()])
        assert table.rows[FieldRegion.COVER] == (1.0, 0.0, 1)

    def test_ratios_sum_to_one_for_populated_regions(self):
        rng = np.random.default_rng(3)
        regions = list(REGIONS)
        shots = [
            _shot(over=i, region=regions[rng.integers(0, 8)],
                  energy=ShotLabel.HIGH if rng.random() < 0.4 else ShotLabel.LOW)
            for i in range(60)
        ]
        table = proportion_table(shots)
        for high, low, n in table.rows.values():
            if n > 0:
                assert high + low == pytest.approx(1.0)


class TestAvgProportionDeviation:
    def test_reference_columns_give_5_6(self):
        truth = ProportionTable.from_ratios({r: t for r, _, t, _ in PROPORTION_ROWS})
        model = ProportionTable.from_ratios({r: m for r, _, _, m in PROPORTION_ROWS})
        dev = avg_proportion_deviation(truth, model)
        assert dev == pytest.approx(5.625, abs=1e-9)
        assert abs(dev - 5.6) <= 0.05

    def test_identity(self):
        table = ProportionTable.from_ratios({r: t for r, _, t, _ in PROPORTION_ROWS})
        assert avg_proportion_deviation(table, table) == 0.0

    def test_single_region_disagreement(self):
        base = {r: 0.5 for r in REGIONS}
        other = dict(base)
        other[FieldRegion.POINT] = 0.58
        dev = avg_proportion_deviation(
            ProportionTable.from_ratios(base), ProportionTable.from_ratios(other)
        )
        assert dev == pytest.approx(1.0)

    def test_symmetry_and_complement(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = ProportionTable.from_ratios({r: rng.random() for r in REGIONS})
            b = ProportionTable.from_ratios({r: rng.random() for r in REGIONS})
            dev = avg_proportion_deviation(a, b)
            assert avg_proportion_deviation(b, a) == pytest.approx(dev)
            a_low = ProportionTable.from_ratios({r: a.rows[r][1] for r in REGIONS})
            b_low = ProportionTable.from_ratios({r: b.rows[r][1] for r in REGIONS})
            assert avg_proportion_deviation(a_low, b_low) == pytest.approx(dev)

    def test_region_mismatch(self):
        a = ProportionTable.from_ratios({FieldRegion.COVER: 0.5})
        b = ProportionTable.from_ratios({FieldRegion.POINT: 0.5})
        with pytest.raises(RegionMismatch):
            avg_proportion_deviation(a, b)


class TestBaselines:
    def _records(self, n=200, seed=0):
        rng = np.random.default_rng(seed)
        return [
            _record("m1", i // 6, i % 6 + 1, runs=int(rng.integers(0, 7)))
            for i in range(n)
        ]

    def test_random_baseline_is_seed_deterministic(self):
        records = self._records()
        a = baseline_predict(BaselineKind.RANDOM, records, seed=9)
        b = baseline_predict(BaselineKind.RANDOM, records, seed=9)
        assert a == b
        c = baseline_predict(BaselineKind.RANDOM, records, seed=10)
        assert a != c

    def test_runs_approx_excludes_two_run_balls(self):
        records = self._records()
        labels = baseline_predict(BaselineKind.RUNS_APPROX, records)
        for rec in records:
            if rec.runs == 2:
                assert rec.key not in labels
            elif rec.runs >= 3:
                assert labels[rec.key] is ShotLabel.HIGH
            else:
                assert labels[rec.key] is ShotLabel.LOW

    def test_random_accuracy_near_half_on_balanced_labels(self):
        records = self._records(n=1000)
        truth = {
            rec.key: ShotLabel.HIGH if i % 2 else ShotLabel.LOW
            for i, rec in enumerate(records)
        }
        predicted = baseline_predict(BaselineKind.RANDOM, records, seed=3)
        acc = prediction_accuracy(predicted, truth)
        # binomial 99% interval around 0.5 for n=1000
        half_width = 2.576 * np.sqrt(0.25 / 1000)
        assert abs(acc - 0.5) <= half_width


class TestSummaries:
    def _phase_shots(self):
        shots = []
        i = 0
        for over, lows, highs in ((3, 22, 6), (15, 11, 4), (25, 14, 14),
                                  (35, 10, 13), (44, 9, 17)):
            for _ in range(lows):
                shots.append(_shot(over=over, ball=i % 6 + 1, energy=ShotLabel.LOW,
                                   match=f"m{i}"))
                i += 1
            for _ in range(highs):
                shots.append(_shot(over=over, ball=i % 6 + 1, energy=ShotLabel.HIGH,
                                   match=f"m{i}"))
                i += 1
        return shots

    def test_phase_buckets_match_hand_counts(self):
        rows = summarize_phases(self._phase_shots())
        assert rows[0] == {"id": 0, "over_range": "0-10", "low": 22, "high": 6}
        assert rows[4] == {"id": 4, "over_range": "40+", "low": 9, "high": 17}

    def test_empty_input_gives_zero_rows(self):
        rows = summarize_phases([])
        assert len(rows) == 5
        assert all(r["low"] == 0 and r["high"] == 0 for r in rows)

    def test_bucket_sums_equal_total(self):
        shots = self._phase_shots()
        rows = summarize_phases(shots)
        assert sum(r["low"] + r["high"] for r in rows) == len(shots)

    def test_bowler_aggregation_hand_case(self):
        # 22 balls and 23 runs against one bowler, 17 high + 5 low shots
        records = []
        shots = []
        runs_seq = [1] * 21 + [2]
        for i, runs in enumerate(runs_seq):
            over, ball = divmod(i, 6)
            records.append(_record("m1", over, ball + 1, bowler="Tahir", runs=runs))
        for i in range(22):
            over, ball = divmod(i, 6)
            energy = ShotLabel.HIGH if i < 17 else ShotLabel.LOW
            shots.append(_shot(over=over, ball=ball + 1, energy=energy))
        rows = summarize_by_bowler(shots, records)
        assert rows[0] == {
            "bowler": "Tahir", "runs": 23, "high": 17, "low": 5, "balls": 22,
        }

    def test_single_bowler_equals_global_totals(self):
        records = [_record("m1", i // 6, i % 6 + 1, bowler="Only", runs=1)
                   for i in range(12)]
        shots = heuristic_shots(records)
        rows = summarize_by_bowler(shots, records)
        assert len(rows) == 1
        assert rows[0]["balls"] == 12
        assert rows[0]["low"] == 12

    def test_per_bowler_balls_partition_total(self):
        rng = np.random.default_rng(5)
        bowlers = ["A", "B", "C"]
        records = [
            _record("m1", i // 6, i % 6 + 1, bowler=bowlers[rng.integers(0, 3)],
                    runs=int(rng.integers(0, 7)))
            for i in range(90)
        ]
        rows = summarize_by_bowler(heuristic_shots(records), records)
        assert sum(r["balls"] for r in rows) == 90


class TestLoadPredictions:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text(
            "match_id,over,ball,label,score\nm1,12,3,high,0.91\nm1,12,4,low,0.2\n"
        )
        preds = load_predictions(path)
        assert len(preds) == 2
        assert preds[0].label is ShotLabel.HIGH
        assert preds[1].score == 0.2
