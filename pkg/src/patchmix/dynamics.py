"""Segment-dynamics diagnostics: length fluctuations, autocorrelations with
shuffle noise levels, intraday occurrence profiles, length-vs-mean relation.
"""

from dataclasses import dataclass

import numpy as np

from .loess import LoessConfig, LoessCurve, loess_fit
from .validation import as_float_array


def length_fluctuations(lengths, j: int):
    """Differences between segment lengths j positions apart."""
    arr = as_float_array(lengths, "lengths", min_len=1)
    if j < 1:
        raise ValueError("j must be >= 1")
    if j >= arr.size:
        raise ValueError(f"j={j} needs more than j lengths, got {arr.size}")
    return arr[j:] - arr[:-j]


@dataclass(frozen=True)
class CorrelationReport:
    lags: np.ndarray
    values: np.ndarray        # covariance estimator per lag
    normalized: np.ndarray    # values / values[0]
    noise_level: float        # 3 x SD of shuffled-series correlations
    first_noise_lag: int      # smallest lag >= 1 with |C| at/below noise
    degenerate: bool = False


def autocorr(values, max_lag: int, shuffles: int = 100, seed: int = 0):
    """Autocovariance function with a shuffle-based noise level.

    Uses the biased covariance estimator C(l) = mean((x_t - m)(x_{t+l} - m))
    so C(0) is the population variance. The noise level is three times the
    standard deviation of the same estimator applied to `shuffles`
    independent permutations, pooled over lags 1..max_lag.
    """
    x = as_float_array(values, "values", min_len=2)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if max_lag >= x.size:
        raise ValueError(f"max_lag={max_lag} requires more than max_lag values")
    n = x.size
    lags = np.arange(max_lag + 1)

    def covariances(data):
        centered = data - data.mean()
        out = np.empty(max_lag + 1)
        out[0] = np.dot(centered, centered) / n
        for lag in range(1, max_lag + 1):
            out[lag] = np.dot(centered[:-lag], centered[lag:]) / n
        return out

    c = covariances(x)
    if c[0] == 0.0:
        return CorrelationReport(
            lags=lags,
            values=np.zeros(max_lag + 1),
            normalized=np.zeros(max_lag + 1),
            noise_level=0.0,
            first_noise_lag=1,
            degenerate=True,
        )
    rng = np.random.default_rng(seed)
    pooled = np.empty((shuffles, max_lag))
    for s in range(shuffles):
        pooled[s] = covariances(rng.permutation(x))[1:]
    noise = 3.0 * float(np.std(pooled))
    below = np.flatnonzero(np.abs(c[1:]) <= noise)
    first = int(below[0]) + 1 if below.size else -1
    return CorrelationReport(
        lags=lags,
        values=c,
        normalized=c / c[0],
        noise_level=noise,
        first_noise_lag=first,
    )


@dataclass(frozen=True)
class IntradayProfile:
    """Start-time occupancy of session time bands, optionally per length class.

    Bands are equiprobable sample octiles of the pooled start times by
    default ('octile'), or equal-width clock intervals ('clock') for
    comparison against a uniform reference.
    """

    mode: str
    boundaries: np.ndarray          # band edges in minutes since session open
    counts: np.ndarray              # starts per band
    probabilities: np.ndarray       # counts / n
    class_edges: tuple              # interior edges of the length classes
    class_counts: np.ndarray        # starts per length class
    conditional: np.ndarray         # P(band | class), shape (n_classes, n_bands)
    n: int


def intraday_profile(
    segmentation, series, length_classes=None, mode="octile", n_bands=8
):
    """Distribution of segment start times within the trading session.

    In 'octile' mode band boundaries are sample quantiles of the pooled
    start times, so unconditional occupancies are 1/n_bands by
    construction and only the conditional (per length class) occupancies
    are informative. 'clock' mode uses fixed equal-width intervals.
    """
    if mode not in ("octile", "clock"):
        raise ValueError(f"unknown band mode {mode!r}")
    starts = segmentation.starts
    if starts.size < n_bands:
        raise ValueError(f"need at least {n_bands} segment starts, got {starts.size}")
    offsets = series.calendar.session_offset(series.timestamps[starts]).astype(float)
    lengths = segmentation.lengths
    n = offsets.size

    if mode == "octile":
        order = np.argsort(offsets, kind="stable")
        band = np.empty(n, dtype=np.int64)
        band[order] = (np.arange(n) * n_bands) // n
        sorted_offsets = offsets[order]
        edges = [float(sorted_offsets[0])]
        for k in range(1, n_bands):
            first = int(np.searchsorted((np.arange(n) * n_bands) // n, k))
            edges.append(float(sorted_offsets[first]))
        edges.append(float(sorted_offsets[-1]))
        boundaries = np.asarray(edges)
    else:
        session = series.calendar.session_length
        width = session / n_bands
        band = np.minimum((offsets / width).astype(np.int64), n_bands - 1)
        boundaries = np.linspace(0.0, session, n_bands + 1)

    counts = np.bincount(band, minlength=n_bands).astype(np.int64)

    edges = tuple(float(e) for e in (length_classes or ()))
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("length_classes must be strictly increasing")
    cls = np.digitize(lengths, edges)
    n_classes = len(edges) + 1
    class_counts = np.bincount(cls, minlength=n_classes).astype(np.int64)
    conditional = np.zeros((n_classes, n_bands))
    for c in range(n_classes):
        mask = cls == c
        if mask.any():
            conditional[c] = np.bincount(band[mask], minlength=n_bands) / mask.sum()
    return IntradayProfile(
        mode=mode,
        boundaries=boundaries,
        counts=counts,
        probabilities=counts / n,
        class_edges=edges,
        class_counts=class_counts,
        conditional=conditional,
        n=n,
    )


@dataclass(frozen=True)
class LengthVsMeanResult:
    curve: LoessCurve
    slope: float        # OLS slope of length on mean over the central range
    slope_se: float
    decreasing: bool


def length_vs_mean(segmentation, config: LoessConfig = None) -> LengthVsMeanResult:
    """Loess relation between segment length and local mean.

    The monotonicity summary is the sign of the ordinary least-squares
    slope restricted to the central 80% of the mean range, with its
    standard error.
    """
    if len(segmentation) < 10:
        raise ValueError("need at least 10 segments")
    mu = segmentation.means
    ell = segmentation.lengths.astype(float)
    if np.all(mu == mu[0]):
        raise ValueError("degenerate mean spread")
    curve = loess_fit(mu, ell, config or LoessConfig())
    q10, q90 = np.quantile(mu, [0.10, 0.90])
    mask = (mu >= q10) & (mu <= q90)
    x = mu[mask]
    y = ell[mask]
    xm = x.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0 or x.size < 3:
        raise ValueError("degenerate mean spread in the central range")
    slope = float(np.sum((x - xm) * (y - y.mean())) / sxx)
    resid = y - (y.mean() + slope * (x - xm))
    sigma2 = float(np.sum(resid**2)) / (x.size - 2)
    slope_se = float(np.sqrt(sigma2 / sxx))
    return LengthVsMeanResult(
        curve=curve, slope=slope, slope_se=slope_se, decreasing=bool(slope < 0)
    )
