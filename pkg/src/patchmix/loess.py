"""Robust locally weighted linear regression with tricube weights.

Each point is fitted by weighted least squares over its r nearest
neighbors, weights tricube in the distance scaled by the r-th neighbor
distance h_i. Robustness passes reweight by delta_k = W(e_k / (6 s)),
where s is the median absolute residual, and stop once s stabilizes.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin

from .validation import as_float_array, check_paired


def tricube(u):
    """Tricube kernel (1 - |u|^3)^3 on |u| < 1, zero outside."""
    u = np.asarray(u, dtype=float)
    w = np.where(np.abs(u) < 1.0, (1.0 - np.abs(u) ** 3) ** 3, 0.0)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class LoessConfig:
    fraction: float = 0.3
    max_robust_iters: int = 10
    s_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.max_robust_iters < 0:
            raise ValueError("max_robust_iters must be >= 0")


@dataclass(frozen=True)
class LoessCurve:
    """Fitted values at the data abscissas, sorted by x."""

    x: np.ndarray
    y_hat: np.ndarray
    residuals: np.ndarray
    robustness_weights: np.ndarray

    def evaluate(self, x_new):
        """Piecewise-linear interpolation, constant beyond the fitted range."""
        return np.interp(x_new, self.x, self.y_hat)


def evaluate(curve: LoessCurve, x_new):
    return curve.evaluate(x_new)


@njit(cache=True)
def _loess_pass(xs, ys, r, delta):  # pragma: no cover - jitted
    n = xs.size
    yhat = np.empty(n)
    for i in range(n):
        lo = i
        hi = i
        for _ in range(r):
            if lo == 0:
                hi += 1
            elif hi == n - 1:
                lo -= 1
            elif xs[i] - xs[lo - 1] <= xs[hi + 1] - xs[i]:
                lo -= 1
            else:
                hi += 1
        h = max(xs[i] - xs[lo], xs[hi] - xs[i])
        if h <= 0.0:
            # duplicate x beyond the neighbor count: average the duplicates
            j0 = i
            while j0 > 0 and xs[j0 - 1] == xs[i]:
                j0 -= 1
            j1 = i
            while j1 < n - 1 and xs[j1 + 1] == xs[i]:
                j1 += 1
            sw = 0.0
            swy = 0.0
            for k in range(j0, j1 + 1):
                sw += delta[k]
                swy += delta[k] * ys[k]
            if sw <= 0.0:
                sw = float(j1 - j0 + 1)
                swy = 0.0
                for k in range(j0, j1 + 1):
                    swy += ys[k]
            yhat[i] = swy / sw
            continue
        use_delta = True
        for attempt in range(2):
            sw = swx = swy = swxx = swxy = 0.0
            for k in range(lo, hi + 1):
                u = (xs[k] - xs[i]) / h
                if u <= -1.0 or u >= 1.0:
                    continue
                a = 1.0 - abs(u) ** 3
                w = a * a * a
                if use_delta:
                    w *= delta[k]
                dx = xs[k] - xs[i]
                sw += w
                swx += w * dx
                swy += w * ys[k]
                swxx += w * dx * dx
                swxy += w * dx * ys[k]
            if sw > 0.0:
                break
            use_delta = False  # all robustness weights vanished locally
        denom = sw * swxx - swx * swx
        if denom > 1e-12 * sw * swxx:
            yhat[i] = (swxx * swy - swx * swxy) / denom
        else:
            yhat[i] = swy / sw
    return yhat


def loess_fit(x, y, config: LoessConfig = None) -> LoessCurve:
    """Fit the robust loess curve to scattered (x, y) points.

    Pass one fits each point from its neighbors; subsequent passes damp
    outliers through the residual-based tricube weights and stop when the
    median absolute residual changes by less than the configured tolerance.
    """
    if config is None:
        config = LoessConfig()
    xs = as_float_array(x, "x", min_len=3)
    ys = as_float_array(y, "y", min_len=3)
    check_paired(xs, ys, "x", "y")
    if np.all(xs == xs[0]):
        raise ValueError("loess requires at least two distinct x values")
    order = np.lexsort((ys, xs))
    xs = np.ascontiguousarray(xs[order])
    ys = np.ascontiguousarray(ys[order])
    n = xs.size
    r = int(np.ceil(config.fraction * n))
    r = min(max(r, 2), n - 1)

    delta = np.ones(n)
    y_hat = _loess_pass(xs, ys, r, delta)
    resid = ys - y_hat
    s_prev = float(np.median(np.abs(resid)))
    # a first fit already inside the stopping tolerance needs no robust pass
    if s_prev > config.s_tol:
        for _ in range(config.max_robust_iters):
            delta = tricube(resid / (6.0 * s_prev))
            y_hat = _loess_pass(xs, ys, r, delta)
            resid = ys - y_hat
            s = float(np.median(np.abs(resid)))
            if abs(s - s_prev) < config.s_tol:
                break
            s_prev = s
    return LoessCurve(
        x=xs, y_hat=y_hat, residuals=resid, robustness_weights=delta
    )


class LoessRegression(RegressorMixin, BaseEstimator):
    """Loess smoother with the scikit-learn regressor API.

    Parameters
    ----------
    fraction : float
        Fraction of the sample used as the nearest-neighbor span.
    max_robust_iters : int
        Cap on residual-reweighting passes.
    s_tol : float
        Stopping tolerance on the median absolute residual.
    """

    def __init__(self, fraction=0.3, max_robust_iters=10, s_tol=1e-8):
        self.fraction = fraction
        self.max_robust_iters = max_robust_iters
        self.s_tol = s_tol

    def fit(self, X, y):
        config = LoessConfig(self.fraction, self.max_robust_iters, self.s_tol)
        self.curve_ = loess_fit(
            as_float_array(X, "X"), as_float_array(y, "y"), config
        )
        return self

    def predict(self, X):
        return self.curve_.evaluate(as_float_array(X, "X"))
