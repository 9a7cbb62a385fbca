"""Recursive Kolmogorov-Smirnov segmentation of nonstationary series.

A candidate cut splits a window into left/right samples; the cut score is
the exact two-sample KS distance weighted by the harmonic sample size,

    D = D_KS * (1/n_L + 1/n_R)^(-1/2).

The position of maximal D is accepted whenever D exceeds a critical curve
a*(ln n - b)^c calibrated per significance level, and the procedure recurses
into both halves until no window can be split. Segments never drop below a
configurable minimum length.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClusterMixin

from .validation import as_float_array

# Critical-curve coefficients (a, b, c) per admissible significance level.
CRITICAL_COEFFS = {
    0.90: (1.41, 1.74, 0.15),
    0.95: (1.52, 1.80, 0.14),
    0.99: (1.72, 1.86, 0.13),
}

SIGNIFICANCE_LEVELS = tuple(sorted(CRITICAL_COEFFS))


def _coeffs_for(p0):
    for level, coeffs in CRITICAL_COEFFS.items():
        if math.isclose(p0, level, abs_tol=1e-9):
            return coeffs
    raise ValueError(
        f"significance level {p0} not tabulated; choose one of {SIGNIFICANCE_LEVELS}"
    )


@dataclass(frozen=True)
class KssConfig:
    p0: float = 0.95
    min_segment_length: int = 30
    max_depth: int = 64

    def __post_init__(self):
        _coeffs_for(self.p0)
        if self.min_segment_length < 2:
            raise ValueError("min_segment_length must be >= 2")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class Segment:
    start: int
    end: int  # half-open
    length: int
    mean: float
    variance: float


@dataclass(frozen=True)
class Segmentation:
    """Interior cut positions plus per-segment summary statistics."""

    n: int
    cuts: np.ndarray
    segments: tuple = field(default=())

    @classmethod
    def from_values(cls, values, cuts, min_segment_length=1):
        values = np.asarray(values, dtype=float)
        n = values.size
        cuts = np.asarray(sorted(int(c) for c in cuts), dtype=np.int64)
        if cuts.size and (cuts[0] <= 0 or cuts[-1] >= n or np.any(np.diff(cuts) <= 0)):
            raise ValueError("cuts must be strictly increasing interior indices")
        bounds = np.concatenate(([0], cuts, [n]))
        segs = []
        for s, e in zip(bounds[:-1], bounds[1:]):
            s, e = int(s), int(e)
            if e - s < min_segment_length:
                raise ValueError(
                    f"segment [{s}, {e}) shorter than minimum {min_segment_length}"
                )
            chunk = values[s:e]
            segs.append(
                Segment(s, e, e - s, float(np.mean(chunk)), float(np.var(chunk)))
            )
        return cls(n=n, cuts=cuts, segments=tuple(segs))

    def __len__(self):
        return len(self.segments)

    @property
    def lengths(self):
        return np.array([s.length for s in self.segments], dtype=np.int64)

    @property
    def means(self):
        return np.array([s.mean for s in self.segments])

    @property
    def variances(self):
        return np.array([s.variance for s in self.segments])

    @property
    def starts(self):
        return np.array([s.start for s in self.segments], dtype=np.int64)

    def labels(self):
        """Segment index for every sample position."""
        return np.repeat(np.arange(len(self.segments)), self.lengths)

    def to_rows(self):
        return [(s.start, s.end, s.length, s.mean, s.variance) for s in self.segments]

    def to_dict(self):
        return {
            "n": self.n,
            "cuts": [int(c) for c in self.cuts],
            "segments": [
                {
                    "start": s.start,
                    "end": s.end,
                    "length": s.length,
                    "mean": s.mean,
                    "variance": s.variance,
                }
                for s in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, data):
        segs = tuple(
            Segment(d["start"], d["end"], d["length"], d["mean"], d["variance"])
            for d in data["segments"]
        )
        return cls(
            n=int(data["n"]),
            cuts=np.asarray(data["cuts"], dtype=np.int64),
            segments=segs,
        )


def ks_distance(sample_a, sample_b) -> float:
    """Exact sup distance between the empirical distributions of two samples.

    Evaluated at every pooled sample point, with ties collapsed, so the
    result is the true supremum over the real line.
    """
    a = np.sort(as_float_array(sample_a, "sample_a", min_len=1))
    b = np.sort(as_float_array(sample_b, "sample_b", min_len=1))
    pooled = np.union1d(a, b)
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def weighted_ks_statistic(series, cut: int) -> float:
    """Two-sample KS distance at `cut`, weighted by (1/n_L + 1/n_R)^(-1/2)."""
    values = as_float_array(series, "series", min_len=2)
    n = values.size
    if not 0 < cut < n:
        raise ValueError(f"cut {cut} leaves an empty side (n={n})")
    d = ks_distance(values[:cut], values[cut:])
    return d / math.sqrt(1.0 / cut + 1.0 / (n - cut))


def critical_value(n: int, p0: float) -> float:
    """Significance threshold a*(ln n - b)^c for the maximal weighted statistic."""
    a, b, c = _coeffs_for(p0)
    if n < 3:
        raise ValueError("critical value requires n >= 3")
    ln_n = math.log(n)
    if ln_n <= b:
        raise ValueError(f"critical-value expression undefined for n={n} (ln n <= {b})")
    return a * (ln_n - b) ** c


def _min_testable_window(p0: float) -> int:
    b = _coeffs_for(p0)[1]
    return int(math.floor(math.exp(b))) + 1


@njit(cache=True)
def _scan_cuts(rank_by_time, group_end, lmin):  # pragma: no cover - jitted
    n = rank_by_time.shape[0]
    in_left = np.zeros(n, dtype=np.uint8)
    for i in range(lmin):
        in_left[rank_by_time[i]] = 1
    best_d = -1.0
    best_c = -1
    for c in range(lmin, n - lmin + 1):
        m = 0
        left_count = 0
        for j in range(n):
            left_count += in_left[j]
            if group_end[j]:
                v = n * left_count - c * (j + 1)
                if v < 0:
                    v = -v
                if v > m:
                    m = v
        d = m / math.sqrt(n * c * (n - c))
        if d > best_d:
            best_d = d
            best_c = c
        if c < n - lmin:
            in_left[rank_by_time[c]] = 1
    return best_c, best_d


def find_best_cut(window, min_segment_length: int):
    """Best admissible cut of a window, or None when no cut is possible.

    Scans every cut leaving at least `min_segment_length` samples on each
    side and returns (index, D_max) for the maximal weighted KS statistic,
    ties broken toward the smallest index.
    """
    values = as_float_array(window, "window")
    n = values.size
    lmin = int(min_segment_length)
    if lmin < 1:
        raise ValueError("min_segment_length must be >= 1")
    if n < 2 * lmin:
        return None
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    group_end = np.empty(n, dtype=np.bool_)
    group_end[:-1] = sorted_vals[1:] != sorted_vals[:-1]
    group_end[-1] = True
    rank_by_time = np.empty(n, dtype=np.int64)
    rank_by_time[order] = np.arange(n, dtype=np.int64)
    cut, d_max = _scan_cuts(rank_by_time, group_end, lmin)
    return int(cut), float(d_max)


def segment_series(values, config: KssConfig = None) -> Segmentation:
    """Recursively segment a series into quasi-stationary patches.

    Each window is cut at its maximal weighted KS statistic whenever that
    statistic exceeds the critical value for the window's own length, then
    the two halves are processed independently (left first). Deterministic
    for fixed input and configuration.
    """
    if config is None:
        config = KssConfig()
    x = as_float_array(values, "values")
    lmin = config.min_segment_length
    if x.size < 2 * lmin:
        raise ValueError(
            f"series of length {x.size} cannot be segmented with "
            f"min_segment_length={lmin}"
        )
    min_testable = max(2 * lmin, _min_testable_window(config.p0))
    cuts = []

    def recurse(start, end, depth):
        n = end - start
        if n < min_testable or depth >= config.max_depth:
            return
        cut, d_max = find_best_cut(x[start:end], lmin)
        if d_max > critical_value(n, config.p0):
            split = start + cut
            cuts.append(split)
            recurse(start, split, depth + 1)
            recurse(split, end, depth + 1)

    recurse(0, x.size, 0)
    return Segmentation.from_values(x, sorted(cuts), lmin)


class KolmogorovSmirnovSegmenter(ClusterMixin, BaseEstimator):
    """Change-point segmenter with the scikit-learn estimator API.

    fit(X) exposes the segmentation through ``segmentation_``, ``cuts_``
    and the per-sample ``labels_`` (segment index), so fit_predict behaves
    like a clustering along the time axis.

    Parameters
    ----------
    p0 : float
        Significance level, one of 0.90, 0.95, 0.99.
    min_segment_length : int
        Lower bound on the length of any produced segment.
    max_depth : int
        Safety bound on the recursion depth.
    """

    def __init__(self, p0=0.95, min_segment_length=30, max_depth=64):
        self.p0 = p0
        self.min_segment_length = min_segment_length
        self.max_depth = max_depth

    def fit(self, X, y=None):
        x = as_float_array(X, "X", min_len=2)
        config = KssConfig(self.p0, self.min_segment_length, self.max_depth)
        self.segmentation_ = segment_series(x, config)
        self.cuts_ = self.segmentation_.cuts
        self.labels_ = self.segmentation_.labels()
        return self
