import math

import numpy as np
import pytest
from sklearn.base import clone

from patchmix.segmentation import (
    KolmogorovSmirnovSegmenter,
    KssConfig,
    Segmentation,
    critical_value,
    find_best_cut,
    ks_distance,
    segment_series,
    weighted_ks_statistic,
)


def brute_force_weighted(series, cut):
    """Independent oracle: direct EDF sup over all sample points."""
    series = np.asarray(series, dtype=float)
    left, right = series[:cut], series[cut:]
    pts = np.concatenate([left, right])
    d = 0.0
    for p in pts:
        fl = np.mean(left <= p)
        fr = np.mean(right <= p)
        d = max(d, abs(fl - fr))
    return d / math.sqrt(1.0 / left.size + 1.0 / right.size)


class TestKsDistance:
    def test_identical_samples(self):
        assert ks_distance([1, 2, 3], [1, 2, 3]) == 0.0

    def test_disjoint_supports(self):
        assert ks_distance([1, 2, 3], [4, 5, 6]) == 1.0

    def test_interleaved(self):
        assert ks_distance([1, 3], [2, 4]) == pytest.approx(0.5)

    def test_ties_do_not_inflate(self):
        assert ks_distance([1.0, 1.0], [1.0, 1.0]) == 0.0

    def test_symmetry_range_and_monotone_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            a = rng.normal(size=rng.integers(1, 40))
            b = rng.normal(size=rng.integers(1, 40))
            d = ks_distance(a, b)
            assert d == ks_distance(b, a)
            assert 0.0 <= d <= 1.0
            # common strictly monotone transform leaves the distance unchanged
            assert ks_distance(np.exp(a), np.exp(b)) == pytest.approx(d)
            assert ks_distance(-a[::-1], -b) == pytest.approx(d)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            ks_distance([], [1.0])


class TestWeightedStatistic:
    def test_equal_halves_weight_is_one(self):
        # n_L = n_R = 2 with D_KS = 0.5
        assert weighted_ks_statistic([0.0, 0.0, 0.0, 1.0], 2) == pytest.approx(0.5)

    def test_identical_halves(self):
        assert weighted_ks_statistic([1.0, 2.0, 1.0, 2.0], 2) == 0.0

    def test_unbalanced_split(self):
        series = np.concatenate([[0.0], np.ones(99)])
        expected = (1.0 / 1 + 1.0 / 99) ** -0.5
        assert weighted_ks_statistic(series, 1) == pytest.approx(expected, abs=1e-12)

    def test_degenerate_split_rejected(self):
        with pytest.raises(ValueError):
            weighted_ks_statistic([1.0, 2.0], 0)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(4, 200))
            series = rng.choice([0.0, 0.5, 1.3, 2.0], size=n)  # force ties
            series += rng.normal(0, 0.3, size=n)
            cut = int(rng.integers(1, n))
            assert weighted_ks_statistic(series, cut) == pytest.approx(
                brute_force_weighted(series, cut), abs=1e-12
            )


class TestCriticalValue:
    def test_direct_evaluation(self):
        assert critical_value(1000, 0.95) == pytest.approx(
            1.52 * (math.log(1000) - 1.80) ** 0.14, abs=1e-12
        )
        assert critical_value(100, 0.90) == pytest.approx(
            1.41 * (math.log(100) - 1.74) ** 0.15, abs=1e-12
        )
        assert critical_value(1000, 0.95) == pytest.approx(1.9099, abs=2e-4)
        assert critical_value(100, 0.90) == pytest.approx(1.6512, abs=2e-4)

    def test_monotone_in_n(self):
        for p0 in (0.90, 0.95, 0.99):
            assert critical_value(10_000, p0) > critical_value(1000, p0)

    def test_untabulated_level_rejected(self):
        with pytest.raises(ValueError, match="not tabulated"):
            critical_value(100, 0.80)


class TestFindBestCut:
    def test_constant_window_zero_at_first_admissible(self):
        cut, d_max = find_best_cut(np.zeros(100), 30)
        assert d_max == 0.0
        assert cut == 30

    def test_window_too_short(self):
        assert find_best_cut(np.zeros(59), 30) is None

    def test_mean_shift_localized(self):
        rng = np.random.default_rng(42)
        hits = 0
        trials = 200
        for _ in range(trials):
            window = np.concatenate(
                [rng.normal(0, 1, 500), rng.normal(5, 1, 500)]
            )
            cut, _ = find_best_cut(window, 30)
            hits += 480 <= cut <= 520
        assert hits / trials >= 0.95

    def test_agrees_with_exhaustive_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = int(rng.integers(20, 120))
            window = rng.normal(size=n) + np.linspace(0, rng.uniform(0, 2), n)
            lmin = 5
            cut, d_max = find_best_cut(window, lmin)
            stats = [
                (weighted_ks_statistic(window, c), c)
                for c in range(lmin, n - lmin + 1)
            ]
            best = max(s for s, _ in stats)
            best_cut = min(c for s, c in stats if s == best)
            assert d_max == pytest.approx(best, abs=1e-12)
            assert cut == best_cut


class TestSegmentation:
    def test_iid_series_rarely_cut(self):
        cuts = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            seg = segment_series(rng.normal(size=10_000), KssConfig(p0=0.95))
            cuts += len(seg) > 1
        assert cuts <= 2  # >= 90% of trials produce zero cuts

    def test_three_regime_recovery(self):
        good = 0
        trials = 25
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            x = np.concatenate(
                [rng.normal(0, 1, 1000), rng.normal(3, 1, 1000), rng.normal(0, 1, 1000)]
            )
            seg = segment_series(x, KssConfig())
            if len(seg.cuts) == 2:
                good += abs(seg.cuts[0] - 1000) <= 25 and abs(seg.cuts[1] - 2000) <= 25
        assert good / trials >= 0.9

    def test_tiling_and_min_length(self):
        rng = np.random.default_rng(17)
        x = np.concatenate([rng.normal(m, 1, rng.integers(40, 400)) for m in range(6)])
        seg = segment_series(x, KssConfig())
        lengths = seg.lengths
        assert lengths.sum() == x.size
        assert lengths.min() >= 30
        starts = seg.starts
        assert np.all(np.diff(starts) > 0)

    def test_deterministic(self):
        rng = np.random.default_rng(23)
        x = np.concatenate([rng.normal(0, 1, 500), rng.normal(2, 1, 500)])
        a = segment_series(x, KssConfig())
        b = segment_series(x, KssConfig())
        np.testing.assert_array_equal(a.cuts, b.cuts)

    def test_series_too_short_rejected(self):
        with pytest.raises(ValueError):
            segment_series(np.zeros(59), KssConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            KssConfig(p0=0.85)
        with pytest.raises(ValueError):
            KssConfig(min_segment_length=1)

    def test_min_length_bound_only_affects_short_segments(self):
        # distribution of lengths >= 30 is unchanged when the bound is lifted
        rng = np.random.default_rng(31)
        chunks = []
        for _ in range(40):
            chunks.append(rng.normal(rng.uniform(-3, 3), 1.0, rng.integers(20, 200)))
        x = np.concatenate(chunks)
        bounded = segment_series(x, KssConfig(min_segment_length=30))
        loose = segment_series(x, KssConfig(min_segment_length=5))
        assert bounded.lengths.min() >= 30
        long_bounded = np.sort(bounded.lengths[bounded.lengths >= 30])
        long_loose = np.sort(loose.lengths[loose.lengths >= 30])
        assert ks_distance(long_bounded, long_loose) < 0.35

    def test_segmentation_round_trip(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=200)
        seg = Segmentation.from_values(x, [60, 120])
        again = Segmentation.from_dict(seg.to_dict())
        np.testing.assert_array_equal(seg.cuts, again.cuts)
        assert seg.segments == again.segments


class TestEstimatorApi:
    def test_fit_predict_labels(self):
        rng = np.random.default_rng(4)
        x = np.concatenate([rng.normal(0, 1, 400), rng.normal(4, 1, 400)])
        est = KolmogorovSmirnovSegmenter()
        labels = est.fit_predict(x.reshape(-1, 1))
        assert labels.shape == (800,)
        assert len(np.unique(labels)) == len(est.segmentation_)
        assert np.all(np.diff(labels) >= 0)

    def test_get_params_and_clone(self):
        est = KolmogorovSmirnovSegmenter(p0=0.99, min_segment_length=40)
        params = est.get_params()
        assert params["p0"] == 0.99
        twin = clone(est)
        assert twin.get_params() == params
