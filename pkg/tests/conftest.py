import numpy as np
import pytest

from patchmix.series import MINUTES_PER_DAY, Series, TradingCalendar


def session_timestamps(n, calendar=None):
    """Contiguous in-session minute stamps spanning as many days as needed."""
    calendar = calendar or TradingCalendar()
    k = np.arange(n, dtype=np.int64)
    session = calendar.session_length
    return (k // session) * MINUTES_PER_DAY + calendar.open_minute + (k % session)


def make_series(values, calendar=None):
    values = np.asarray(values, dtype=float)
    calendar = calendar or TradingCalendar()
    return Series(
        timestamps=session_timestamps(values.size, calendar),
        values=values,
        calendar=calendar,
    )


@pytest.fixture
def calendar():
    return TradingCalendar()
