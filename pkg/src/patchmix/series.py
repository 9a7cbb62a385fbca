"""Time-series data model: calendar bookkeeping, normalization, returns.

Timestamps are integer minutes since epoch. A trading calendar pins every
sample to a session (one session per calendar day, fixed open/close
minute-of-day). Values are immutable after construction; all transforms
return new objects.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import as_float_array

MINUTES_PER_DAY = 1440


@dataclass(frozen=True)
class TradingCalendar:
    """Session boundaries as minutes-of-day, [open_minute, close_minute)."""

    open_minute: int = 570   # 09:30
    close_minute: int = 960  # 16:00

    def __post_init__(self):
        if not 0 <= self.open_minute < self.close_minute <= MINUTES_PER_DAY:
            raise ValueError(
                f"invalid session window [{self.open_minute}, {self.close_minute})"
            )

    @property
    def session_length(self):
        return self.close_minute - self.open_minute

    def contains(self, timestamps):
        mod = np.asarray(timestamps) % MINUTES_PER_DAY
        return (mod >= self.open_minute) & (mod < self.close_minute)

    def session_day(self, timestamps):
        """Calendar day index (days since epoch) of each timestamp."""
        return np.asarray(timestamps) // MINUTES_PER_DAY

    def session_offset(self, timestamps):
        """Minutes elapsed since session open, in [0, session_length)."""
        return np.asarray(timestamps) % MINUTES_PER_DAY - self.open_minute


@dataclass(frozen=True)
class Series:
    """A timestamped value sequence bound to a trading calendar."""

    timestamps: np.ndarray
    values: np.ndarray
    calendar: TradingCalendar = field(default_factory=TradingCalendar)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = as_float_array(self.values, "values")
        if ts.ndim != 1 or ts.size != vals.size:
            raise ValueError(
                f"timestamps and values must be 1-D and paired, got "
                f"{ts.shape} and {vals.shape}"
            )
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            bad = int(np.flatnonzero(np.diff(ts) <= 0)[0]) + 1
            raise ValueError(f"timestamps must be strictly increasing (index {bad})")
        inside = self.calendar.contains(ts)
        if ts.size and not inside.all():
            bad = int(np.flatnonzero(~inside)[0])
            raise ValueError(
                f"timestamp {ts[bad]} (index {bad}) falls outside calendar sessions"
            )
        ts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def session_ids(self):
        return self.calendar.session_day(self.timestamps)


@dataclass(frozen=True)
class NormalizedVolumeSeries(Series):
    """Volume divided by its series mean; stores the normalization constant."""

    vbar: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.values < 0):
            bad = int(np.flatnonzero(self.values < 0)[0])
            raise ValueError(f"normalized volume negative at index {bad}")
        mean = float(np.mean(self.values))
        if abs(mean - 1.0) > 1e-9:
            raise ValueError(f"normalized volume mean must be 1, got {mean!r}")


@dataclass(frozen=True)
class ReturnSeries:
    """Price differences r(t) = S(t) - S(t-1), stamped at the later minute."""

    timestamps: np.ndarray
    values: np.ndarray
    calendar: TradingCalendar = field(default_factory=TradingCalendar)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = as_float_array(self.values, "values")
        if ts.size != vals.size:
            raise ValueError("timestamps and values must be paired")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        ts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def session_ids(self):
        return self.calendar.session_day(self.timestamps)


def normalize_volume(raw: Series) -> NormalizedVolumeSeries:
    """Divide volume by its mean so the output averages to one.

    Rejects empty input, negative entries (reported with their index) and a
    zero mean.
    """
    if len(raw) == 0:
        raise ValueError("cannot normalize an empty series")
    neg = np.flatnonzero(raw.values < 0)
    if neg.size:
        raise ValueError(f"volume must be non-negative, offender at index {int(neg[0])}")
    vbar = float(np.mean(raw.values))
    if vbar <= 0:
        raise ValueError("volume mean must be positive")
    return NormalizedVolumeSeries(
        timestamps=raw.timestamps,
        values=raw.values / vbar,
        calendar=raw.calendar,
        vbar=vbar,
    )


def price_to_returns(prices: Series, cross_session: bool = False) -> ReturnSeries:
    """First differences of the price series.

    With cross_session=False (default), differences spanning a session
    boundary are dropped, so each session contributes its own length-1
    shorter difference block. Single-point sessions contribute nothing.
    """
    if len(prices) < 2:
        return ReturnSeries(
            timestamps=prices.timestamps[:0],
            values=prices.values[:0],
            calendar=prices.calendar,
        )
    diffs = np.diff(prices.values)
    ts = prices.timestamps[1:]
    if not cross_session:
        days = prices.session_ids()
        keep = days[1:] == days[:-1]
        diffs = diffs[keep]
        ts = ts[keep]
    return ReturnSeries(timestamps=ts, values=diffs, calendar=prices.calendar)


def magnitude(returns: ReturnSeries) -> Series:
    """Absolute value of a return series, timestamps preserved."""
    return Series(
        timestamps=returns.timestamps,
        values=np.abs(returns.values),
        calendar=returns.calendar,
    )
