"""Two-parameter distribution families: densities, MLE fits, fit scoring.

All positive-support families are parameterized as (phi, theta) following
the shape/scale conventions

    gamma       x^(phi-1) exp(-x/theta) / (theta^phi Gamma(phi))
    lognormal   exp(-(ln x - phi)^2 / (2 theta^2)) / (sqrt(2 pi) theta x)
    invgamma    theta^phi x^(-phi-1) exp(-theta/x) / Gamma(phi)
    weibull     (phi/theta^phi) x^(phi-1) exp(-(x/theta)^phi)
    invweibull  law of 1/X for X weibull(phi, theta)

while laplace and gaussian take (mu, sigma). Densities vanish outside the
support instead of raising; invalid parameters raise.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special, stats
from scipy.optimize import brentq

from .validation import as_float_array

LN_2PI = math.log(2.0 * math.pi)


class Family(str, Enum):
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"
    INVGAMMA = "invgamma"
    WEIBULL = "weibull"
    INVWEIBULL = "invweibull"
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


POSITIVE_FAMILIES = frozenset(
    {Family.GAMMA, Family.LOGNORMAL, Family.INVGAMMA, Family.WEIBULL, Family.INVWEIBULL}
)

# Families compared when scoring local volume patches.
VOLUME_FAMILIES = (
    Family.GAMMA,
    Family.LOGNORMAL,
    Family.INVGAMMA,
    Family.WEIBULL,
    Family.INVWEIBULL,
)


class FitError(ValueError):
    """Raised when a maximum-likelihood fit cannot be produced."""


def _check_params(family, params):
    p1, p2 = float(params[0]), float(params[1])
    if p2 <= 0:
        raise ValueError(f"{family.value} scale must be positive, got {params}")
    # the first parameter is a shape for everything except the location laws
    if family not in (Family.LOGNORMAL, Family.LAPLACE, Family.GAUSSIAN) and p1 <= 0:
        raise ValueError(f"{family.value} shape must be positive, got {params}")
    return p1, p2


def logpdf(family, params, x):
    p1, p2 = _check_params(family, params)
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    if family in POSITIVE_FAMILIES:
        pos = x > 0
        xs = x[pos]
        if family is Family.GAMMA:
            val = (p1 - 1) * np.log(xs) - xs / p2 - p1 * math.log(p2) - special.gammaln(p1)
        elif family is Family.LOGNORMAL:
            lx = np.log(xs)
            val = -lx - math.log(p2) - 0.5 * LN_2PI - (lx - p1) ** 2 / (2 * p2**2)
        elif family is Family.INVGAMMA:
            val = p1 * math.log(p2) - special.gammaln(p1) - (p1 + 1) * np.log(xs) - p2 / xs
        elif family is Family.WEIBULL:
            lr = np.log(xs) - math.log(p2)
            val = math.log(p1) + (p1 - 1) * lr - math.log(p2) - np.exp(p1 * lr)
        else:  # INVWEIBULL
            lr = np.log(xs) + math.log(p2)
            val = math.log(p1) + math.log(p2) - (p1 + 1) * lr - np.exp(-p1 * lr)
        out[pos] = val
    elif family is Family.LAPLACE:
        out = -math.log(2 * p2) - np.abs(x - p1) / p2
    else:  # GAUSSIAN
        out = -0.5 * LN_2PI - math.log(p2) - (x - p1) ** 2 / (2 * p2**2)
    return out


def pdf(family, params, x):
    scalar = np.isscalar(x)
    out = np.exp(logpdf(family, params, x))
    return float(out) if scalar else out


def cdf(family, params, x):
    p1, p2 = _check_params(family, params)
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if family in POSITIVE_FAMILIES:
        out = np.zeros(x.shape)
        pos = x > 0
        xs = x[pos]
        if family is Family.GAMMA:
            out[pos] = special.gammainc(p1, xs / p2)
        elif family is Family.LOGNORMAL:
            out[pos] = special.ndtr((np.log(xs) - p1) / p2)
        elif family is Family.INVGAMMA:
            out[pos] = special.gammaincc(p1, p2 / xs)
        elif family is Family.WEIBULL:
            out[pos] = -np.expm1(-((xs / p2) ** p1))
        else:  # INVWEIBULL
            out[pos] = np.exp(-((xs * p2) ** (-p1)))
    elif family is Family.LAPLACE:
        z = (x - p1) / p2
        out = np.where(z < 0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))
    else:
        out = special.ndtr((x - p1) / p2)
    return float(out[0]) if scalar else out


def sample(family, params, size, rng):
    p1, p2 = _check_params(family, params)
    if family is Family.GAMMA:
        return rng.gamma(p1, p2, size)
    if family is Family.LOGNORMAL:
        return rng.lognormal(p1, p2, size)
    if family is Family.INVGAMMA:
        return 1.0 / rng.gamma(p1, 1.0 / p2, size)
    if family is Family.WEIBULL:
        return p2 * rng.weibull(p1, size)
    if family is Family.INVWEIBULL:
        return 1.0 / (p2 * rng.weibull(p1, size))
    if family is Family.LAPLACE:
        return rng.laplace(p1, p2, size)
    return rng.normal(p1, p2, size)


def scipy_dist(family, params):
    """Frozen scipy distribution matching our parameterization."""
    p1, p2 = _check_params(family, params)
    if family is Family.GAMMA:
        return stats.gamma(p1, scale=p2)
    if family is Family.LOGNORMAL:
        return stats.lognorm(p2, scale=math.exp(p1))
    if family is Family.INVGAMMA:
        return stats.invgamma(p1, scale=p2)
    if family is Family.WEIBULL:
        return stats.weibull_min(p1, scale=p2)
    if family is Family.INVWEIBULL:
        return stats.invweibull(p1, scale=1.0 / p2)
    if family is Family.LAPLACE:
        return stats.laplace(loc=p1, scale=p2)
    return stats.norm(loc=p1, scale=p2)


@dataclass(frozen=True)
class FitResult:
    family: Family
    params: tuple
    log_likelihood: float
    n: int
    sqrtn_dmax: float
    ks_pass: bool

    def __post_init__(self):
        _check_params(self.family, self.params)
        if self.sqrtn_dmax < 0:
            raise ValueError("goodness-of-fit statistic must be non-negative")


@dataclass(frozen=True)
class NormalityReport:
    t_test_p: float
    jarque_bera_p: float

    def __post_init__(self):
        for name in ("t_test_p", "jarque_bera_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")


def _bracket_root(f, x0, family, what):
    """Find a sign change around x0 by geometric expansion, then brentq.

    Expects f increasing in its argument.
    """
    lo = hi = x0
    flo = fhi = f(x0)
    trace = [(x0, flo)]
    for _ in range(200):
        if flo > 0:
            lo /= 1.6
            flo = f(lo)
            trace.append((lo, flo))
        elif fhi < 0:
            hi *= 1.6
            fhi = f(hi)
            trace.append((hi, fhi))
        if flo <= 0 <= fhi:
            return brentq(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
    raise FitError(
        f"{family.value} fit did not converge while solving {what}; "
        f"last bracket attempts: {trace[-3:]}"
    )


def _fit_gamma_raw(x):
    mean = float(np.mean(x))
    mlog = float(np.mean(np.log(x)))
    s = math.log(mean) - mlog
    if s <= 0:
        raise FitError("gamma fit degenerate: data has no spread")
    k0 = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    # ln k - digamma(k) decreases from +inf to 0; flip so the score increases
    k = _bracket_root(
        lambda k: s - math.log(k) + special.digamma(k), k0, Family.GAMMA, "shape score"
    )
    return k, mean / k


def _fit_weibull_raw(x):
    logs = np.log(x)
    sd = float(np.std(logs))
    if sd <= 0:
        raise FitError("weibull fit degenerate: data has no spread")
    mlog = float(np.mean(logs))

    def score(k):
        w = special.softmax(k * logs)
        return float(np.dot(w, logs)) - mlog - 1.0 / k

    k0 = 1.28 / sd
    k = _bracket_root(score, k0, Family.WEIBULL, "shape score")
    log_theta = (special.logsumexp(k * logs) - math.log(logs.size)) / k
    return k, math.exp(log_theta)


def fit_mle(family, data, alpha=0.05) -> FitResult:
    """Maximum-likelihood fit of one family to a sample.

    Closed forms are used where they exist (lognormal, laplace, gaussian);
    the remaining families reduce to a one-dimensional profiled shape
    equation solved to machine precision. The returned result carries the
    sqrt(n)*d_max fit score and the KS pass flag at level `alpha`.
    """
    family = Family(family)
    x = as_float_array(data, "data", min_len=5)
    if np.all(x == x[0]):
        raise FitError(f"{family.value} fit degenerate: all observations equal")
    if family in POSITIVE_FAMILIES and np.any(x <= 0):
        bad = int(np.flatnonzero(x <= 0)[0])
        raise FitError(
            f"{family.value} requires positive data; offender at index {bad}"
        )
    if family is Family.LOGNORMAL:
        logs = np.log(x)
        theta = float(np.std(logs))
        if theta <= 0:
            raise FitError("lognormal fit degenerate: zero log-variance")
        params = (float(np.mean(logs)), theta)
    elif family is Family.LAPLACE:
        mu = float(np.median(x))
        sigma = float(np.mean(np.abs(x - mu)))
        if sigma <= 0:
            raise FitError("laplace fit degenerate: zero spread")
        params = (mu, sigma)
    elif family is Family.GAUSSIAN:
        sigma = float(np.std(x))
        if sigma <= 0:
            raise FitError("gaussian fit degenerate: zero spread")
        params = (float(np.mean(x)), sigma)
    elif family is Family.GAMMA:
        params = _fit_gamma_raw(x)
    elif family is Family.INVGAMMA:
        k, scale = _fit_gamma_raw(1.0 / x)
        params = (k, 1.0 / scale)
    elif family is Family.WEIBULL:
        params = _fit_weibull_raw(x)
    else:  # INVWEIBULL: 1/x is weibull with identical parameters
        params = _fit_weibull_raw(1.0 / x)
    loglik = float(np.sum(logpdf(family, params, x)))
    score = _sqrtn_dmax(family, params, x)
    return FitResult(
        family=family,
        params=params,
        log_likelihood=loglik,
        n=x.size,
        sqrtn_dmax=score,
        ks_pass=bool(score < kolmogorov_quantile(alpha)),
    )


def _sqrtn_dmax(family, params, data):
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    f = cdf(family, params, x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(math.sqrt(n) * max(d_plus, d_minus))


def gof_lilliefors(fit: FitResult, data) -> float:
    """sqrt(n)*d_max between the sample EDF and the fitted CDF.

    The sup distance is evaluated on both sides of every EDF jump, with
    parameters estimated from the same data (Lilliefors-style statistic).
    """
    x = as_float_array(data, "data", min_len=1)
    return _sqrtn_dmax(fit.family, fit.params, x)


def kolmogorov_quantile(alpha=0.05) -> float:
    """Upper alpha quantile of the asymptotic Kolmogorov distribution."""
    return float(stats.kstwobign.isf(alpha))


def ks_significance(fit: FitResult, data, alpha=0.05) -> bool:
    """Pass/fail of the fitted distribution at significance level alpha."""
    return bool(gof_lilliefors(fit, data) < kolmogorov_quantile(alpha))


def lognormal_moments(phi, theta):
    """Mean and variance of a lognormal with log-location phi, log-scale theta."""
    if np.any(np.asarray(theta) <= 0):
        raise ValueError("theta must be positive")
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t2 = theta**2
    mu = np.exp(phi + t2 / 2.0)
    omega = np.expm1(t2) * np.exp(2.0 * phi + t2)
    if mu.ndim == 0:
        return float(mu), float(omega)
    return mu, omega


def normality_tests(local_means) -> NormalityReport:
    """One-sample t test against zero mean plus the Jarque-Bera statistic."""
    x = as_float_array(local_means, "local_means", min_len=8)
    if np.std(x) == 0:
        raise ValueError("normality tests degenerate: input has no spread")
    t_res = stats.ttest_1samp(x, 0.0)
    jb_res = stats.jarque_bera(x)
    return NormalityReport(
        t_test_p=float(t_res.pvalue), jarque_bera_p=float(jb_res.pvalue)
    )
