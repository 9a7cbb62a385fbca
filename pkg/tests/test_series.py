import numpy as np
import pytest

from patchmix.series import (
    MINUTES_PER_DAY,
    ReturnSeries,
    Series,
    TradingCalendar,
    magnitude,
    normalize_volume,
    price_to_returns,
)

from conftest import make_series, session_timestamps


class TestSeriesInvariants:
    def test_timestamps_must_increase(self, calendar):
        ts = session_timestamps(3)
        ts = np.array([ts[0], ts[2], ts[1]])
        with pytest.raises(ValueError, match="strictly increasing"):
            Series(timestamps=ts, values=np.ones(3), calendar=calendar)

    def test_timestamp_outside_session_rejected(self, calendar):
        ts = session_timestamps(3).copy()
        ts[1] = 100  # 01:40, outside the session
        ts.sort()
        with pytest.raises(ValueError, match="outside calendar"):
            Series(timestamps=ts, values=np.ones(3), calendar=calendar)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            make_series([1.0, np.nan, 2.0])

    def test_values_immutable(self):
        s = make_series([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestNormalizeVolume:
    def test_constant_series(self):
        out = normalize_volume(make_series([2.0, 2.0, 2.0]))
        np.testing.assert_allclose(out.values, [1.0, 1.0, 1.0])
        assert out.vbar == 2.0

    def test_symmetry_about_mean(self):
        out = normalize_volume(make_series([1.0, 3.0]))
        np.testing.assert_allclose(out.values, [0.5, 1.5])
        assert out.vbar == 2.0

    def test_large_lognormal_sample_mean_is_one(self):
        rng = np.random.default_rng(7)
        raw = make_series(rng.lognormal(0.0, 1.0, 50_000))
        out = normalize_volume(raw)
        assert abs(np.mean(out.values) - 1.0) <= 1e-9

    def test_round_trip_reproduces_raw(self):
        rng = np.random.default_rng(8)
        raw = make_series(rng.lognormal(0.2, 0.7, 5000))
        out = normalize_volume(raw)
        np.testing.assert_allclose(out.values * out.vbar, raw.values, rtol=1e-12)

    def test_empty_rejected(self, calendar):
        empty = Series(
            timestamps=np.array([], dtype=np.int64),
            values=np.array([]),
            calendar=calendar,
        )
        with pytest.raises(ValueError, match="empty"):
            normalize_volume(empty)

    def test_negative_rejected_with_index(self):
        with pytest.raises(ValueError, match="index 2"):
            normalize_volume(make_series([1.0, 1.0, -0.5, 1.0]))

    def test_zero_mean_rejected(self):
        with pytest.raises(ValueError, match="mean"):
            normalize_volume(make_series([0.0, 0.0]))


class TestPriceToReturns:
    def test_constant_price(self):
        out = price_to_returns(make_series([10.0, 10.0, 10.0]))
        np.testing.assert_allclose(out.values, [0.0, 0.0])

    def test_direct_difference(self):
        out = price_to_returns(make_series([10.0, 11.0, 9.0]))
        np.testing.assert_allclose(out.values, [1.0, -2.0])

    def test_session_boundary_dropped(self, calendar):
        # two sessions of two points each
        open_min = calendar.open_minute
        ts = np.array(
            [open_min, open_min + 1, MINUTES_PER_DAY + open_min,
             MINUTES_PER_DAY + open_min + 1],
            dtype=np.int64,
        )
        prices = Series(timestamps=ts, values=np.array([1.0, 2.0, 5.0, 6.0]),
                        calendar=calendar)
        out = price_to_returns(prices, cross_session=False)
        np.testing.assert_allclose(out.values, [1.0, 1.0])
        kept = price_to_returns(prices, cross_session=True)
        np.testing.assert_allclose(kept.values, [1.0, 3.0, 1.0])

    def test_single_point_sessions_give_empty(self, calendar):
        open_min = calendar.open_minute
        ts = np.array([open_min, MINUTES_PER_DAY + open_min], dtype=np.int64)
        prices = Series(timestamps=ts, values=np.array([3.0, 4.0]), calendar=calendar)
        out = price_to_returns(prices, cross_session=False)
        assert len(out) == 0

    def test_telescoping_within_sessions(self):
        rng = np.random.default_rng(5)
        prices = make_series(100 + np.cumsum(rng.normal(size=2000)))
        out = price_to_returns(prices)
        days = prices.session_ids()
        out_days = out.session_ids()
        for day in np.unique(days):
            in_day = prices.values[days == day]
            np.testing.assert_allclose(
                np.sum(out.values[out_days == day]), in_day[-1] - in_day[0],
                atol=1e-9,
            )

    def test_every_return_in_exactly_one_session(self):
        rng = np.random.default_rng(6)
        prices = make_series(100 + np.cumsum(rng.normal(size=1200)))
        out = price_to_returns(prices)
        assert np.all(out.calendar.contains(out.timestamps))
        # each return shares a session day with its predecessor minute
        days = out.session_ids()
        prev_days = out.calendar.session_day(out.timestamps - 1)
        np.testing.assert_array_equal(days, prev_days)


class TestMagnitude:
    def test_elementwise(self, calendar):
        ts = session_timestamps(3)
        ret = ReturnSeries(timestamps=ts, values=np.array([1.0, -2.0, 0.0]),
                           calendar=calendar)
        out = magnitude(ret)
        np.testing.assert_allclose(out.values, [1.0, 2.0, 0.0])
        np.testing.assert_array_equal(out.timestamps, ts)

    def test_empty(self, calendar):
        ret = ReturnSeries(
            timestamps=np.array([], dtype=np.int64), values=np.array([]),
            calendar=calendar,
        )
        assert len(magnitude(ret)) == 0

    def test_random_against_loop_oracle(self, calendar):
        rng = np.random.default_rng(11)
        vals = rng.normal(size=500) * rng.choice([-1.0, 1.0], size=500)
        ret = ReturnSeries(
            timestamps=session_timestamps(500), values=vals, calendar=calendar
        )
        out = magnitude(ret)
        expected = np.array([abs(v) for v in vals])
        np.testing.assert_array_equal(out.values, expected)
