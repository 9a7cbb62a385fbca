"""Long-term distributions as mixtures of per-segment local laws.

Collects the ingredients estimated from a segmentation (segment-length law,
parameter prior, mean-variance relation, mean-length relation) into a model
that can evaluate the long-term density two ways: as the length-weighted sum
of the fitted local densities, or as an integral of the local family over
the fitted parameter prior with the location parameter eliminated through
the mean-variance relation. A separate evaluator mixes a zero-centered
local return law over an inverse-gamma prior on the squared volatility.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.optimize import brentq

from .distributions import Family, FitError, fit_mle, pdf, scipy_dist
from .loess import LoessCurve
from .validation import as_float_array, require_all_positive

THETA_PRIOR_CANDIDATES = (
    Family.GAMMA,
    Family.WEIBULL,
    Family.INVGAMMA,
    Family.INVWEIBULL,
    Family.LOGNORMAL,
)

_TAIL_MASS = 1e-11  # prior mass discarded on each side when truncating quadrature


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""


def _quad_checked(integrand, lo, hi, abs_tol, rel_tol=1e-9):
    value, err = quad(integrand, lo, hi, epsabs=abs_tol, epsrel=rel_tol, limit=200)
    if err > max(abs_tol, 2.0 * rel_tol * abs(value)):
        raise QuadratureError(
            f"quadrature achieved tolerance {err:.3e}, requested {abs_tol:.3e}"
        )
    return value


@dataclass(frozen=True)
class LengthLaw:
    """Shifted-exponential law of segment lengths (minutes)."""

    lam: float
    ell_min: float
    tail_break: float = 330.0
    tail_fraction: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.ell_min < 0:
            raise ValueError("ell_min must be non-negative")

    def ccdf(self, ell):
        ell = np.asarray(ell, dtype=float)
        out = np.where(ell <= self.ell_min, 1.0, np.exp(-(ell - self.ell_min) / self.lam))
        return float(out) if out.ndim == 0 else out


def fit_length_law(
    lengths, ell_min, tail_break=330.0, restrict_to_core=False
) -> LengthLaw:
    """Fit the shifted-exponential length law by maximum likelihood.

    The plain estimate is the mean excess over ell_min. The fraction of
    segments lasting beyond `tail_break` is reported descriptively; with
    `restrict_to_core` the fit uses only lengths below the break, with the
    truncation-corrected likelihood, so a heavy second regime does not
    inflate the core scale.
    """
    arr = as_float_array(lengths, "lengths", min_len=1)
    if np.any(arr < ell_min):
        raise ValueError("all lengths must be >= ell_min")
    if arr.size < 10:
        warnings.warn(
            f"only {arr.size} segment lengths; length-law fit is unstable",
            stacklevel=2,
        )
    excess = arr - ell_min
    tail_fraction = float(np.mean(arr > tail_break)) if tail_break else 0.0
    lam = float(np.mean(excess))
    if restrict_to_core and tail_break and np.any(arr >= tail_break):
        core = excess[arr < tail_break]
        horizon = tail_break - ell_min
        if core.size == 0:
            raise ValueError("no lengths below tail_break to fit the core law")
        core_mean = float(np.mean(core))
        if 0.0 < core_mean < horizon / 2.0 - 1e-12:

            def truncated_score(lam_):
                ratio = horizon / lam_
                correction = horizon / math.expm1(ratio) if ratio < 700.0 else 0.0
                return core_mean + correction - lam_

            lam = brentq(truncated_score, 1e-9, 1e9, xtol=1e-12, rtol=1e-14)
        # otherwise the truncated likelihood has no interior optimum;
        # keep the full-sample estimate
    if lam == 0.0:
        warnings.warn("degenerate length law: all lengths equal ell_min", stacklevel=2)
    return LengthLaw(
        lam=lam, ell_min=float(ell_min), tail_break=float(tail_break),
        tail_fraction=tail_fraction,
    )


@dataclass(frozen=True)
class MuOmegaRelation:
    """Linear or dual-linear relation between ln(mean) and ln(variance).

    The low branch applies below the crossover (in ln-variance units), the
    high branch above it; single mode uses only the low coefficients.
    """

    mode: str
    alpha_low: float
    beta_low: float
    sigma_low: float
    alpha_high: float = None
    beta_high: float = None
    sigma_high: float = None
    crossover: float = None

    def __post_init__(self):
        if self.mode not in ("single", "dual"):
            raise ValueError(f"mode must be 'single' or 'dual', got {self.mode!r}")
        if self.mode == "dual":
            for name in ("alpha_high", "beta_high", "sigma_high", "crossover"):
                if getattr(self, name) is None:
                    raise ValueError(f"dual mode requires {name}")
            if not np.isfinite(self.crossover):
                raise ValueError("dual mode requires a finite crossover")

    def log_mu(self, log_omega):
        x = np.asarray(log_omega, dtype=float)
        low = self.alpha_low * x + self.beta_low
        if self.mode == "single":
            out = low
        else:
            high = self.alpha_high * x + self.beta_high
            out = np.where(x > self.crossover, high, low)
        return float(out) if out.ndim == 0 else out

    def mu_at_crossover(self):
        if self.mode != "dual":
            raise ValueError("crossover mean is defined for dual mode only")
        return math.exp(self.alpha_low * self.crossover + self.beta_low)


def _ols_line(x, y):
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        return None
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    sse = float(np.sum(resid**2))
    sigma = math.sqrt(sse / (n - 2)) if n > 2 else 0.0
    return slope, intercept, sse, sigma


def fit_mu_omega(mu, omega, min_improvement=0.02) -> MuOmegaRelation:
    """Fit the ln(mean) vs ln(variance) relation of segment moments.

    Fits a single line and a two-piece line (breakpoint scanned over
    interior sample quantiles, least squares per piece) and keeps the dual
    form only when it reduces the total squared error by at least
    `min_improvement`. The reported crossover is where the two fitted
    branches intersect.
    """
    mu = as_float_array(mu, "mu", min_len=20)
    omega = as_float_array(omega, "omega", min_len=20)
    if mu.size != omega.size:
        raise ValueError("mu and omega must be paired")
    require_all_positive(omega, "omega")
    require_all_positive(mu, "mu")
    x = np.log(omega)
    y = np.log(mu)
    single = _ols_line(x, y)
    if single is None:
        raise ValueError("degenerate variance spread: all omega equal")
    alpha_s, beta_s, sse_s, sigma_s = single

    best = None
    for q in np.linspace(0.10, 0.90, 41):
        c = float(np.quantile(x, q))
        left = x <= c
        right = ~left
        if left.sum() < 5 or right.sum() < 5:
            continue
        fit_l = _ols_line(x[left], y[left])
        fit_r = _ols_line(x[right], y[right])
        if fit_l is None or fit_r is None:
            continue
        sse = fit_l[2] + fit_r[2]
        if best is None or sse < best[0]:
            best = (sse, fit_l, fit_r)

    use_dual = False
    if best is not None and sse_s > 0.0:
        sse_d, fit_l, fit_r = best
        if (sse_s - sse_d) / sse_s >= min_improvement:
            alpha_l, beta_l = fit_l[0], fit_l[1]
            alpha_h, beta_h = fit_r[0], fit_r[1]
            if abs(alpha_l - alpha_h) > 1e-12:
                crossover = (beta_h - beta_l) / (alpha_l - alpha_h)
                use_dual = True
    if not use_dual:
        return MuOmegaRelation(
            mode="single", alpha_low=alpha_s, beta_low=beta_s, sigma_low=sigma_s
        )
    return MuOmegaRelation(
        mode="dual",
        alpha_low=alpha_l,
        beta_low=beta_l,
        sigma_low=fit_l[3],
        alpha_high=alpha_h,
        beta_high=beta_h,
        sigma_high=fit_r[3],
        crossover=crossover,
    )


def phi_of_theta(theta, alpha, beta):
    """Location parameter implied by the linear ln(mean)-ln(variance) relation.

        phi = beta/(1-2 alpha) - theta^2/2 + alpha ln(e^(theta^2)-1)/(1-2 alpha)

    Singular at alpha = 1/2, where the relation no longer pins phi.
    """
    if abs(1.0 - 2.0 * alpha) < 1e-12:
        raise ValueError("phi_of_theta is singular at alpha = 1/2")
    scalar = np.isscalar(theta)
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(theta_arr <= 0):
        raise ValueError("theta must be positive")
    t2 = theta_arr**2
    log_expm1 = np.empty_like(t2)
    small = t2 < 1.0
    log_expm1[small] = np.log(np.expm1(t2[small]))
    log_expm1[~small] = t2[~small] + np.log1p(-np.exp(-t2[~small]))
    out = beta / (1 - 2 * alpha) - t2 / 2 + alpha * log_expm1 / (1 - 2 * alpha)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ThetaPrior:
    """Long-term law of the local scale parameter."""

    family: Family
    shape: float
    scale: float
    scores: dict = None  # sqrt(n)*d_max per candidate family

    def __post_init__(self):
        if self.family not in (Family.GAMMA, Family.WEIBULL):
            raise ValueError("theta prior must be gamma or weibull")
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("prior parameters must be positive")

    def pdf(self, theta):
        return pdf(self.family, (self.shape, self.scale), theta)

    def support_interval(self, tail_mass=_TAIL_MASS):
        dist = scipy_dist(self.family, (self.shape, self.scale))
        return float(dist.ppf(tail_mass)), float(dist.isf(tail_mass))


def fit_theta_prior(thetas) -> ThetaPrior:
    """Select the prior for the local scale among candidate families.

    All five candidates are fitted by maximum likelihood and scored with
    sqrt(n)*d_max; the returned prior is the better of gamma and weibull,
    with every candidate's score kept for reporting.
    """
    arr = as_float_array(thetas, "thetas", min_len=20)
    require_all_positive(arr, "thetas")
    scores = {}
    fits = {}
    for family in THETA_PRIOR_CANDIDATES:
        try:
            res = fit_mle(family, arr)
        except FitError:
            scores[family.value] = float("inf")
            continue
        fits[family] = res
        scores[family.value] = res.sqrtn_dmax
    winner = min(
        (Family.GAMMA, Family.WEIBULL), key=lambda fam: scores.get(fam.value, np.inf)
    )
    if winner not in fits:
        raise FitError("neither gamma nor weibull could be fitted to the theta sample")
    params = fits[winner].params
    return ThetaPrior(family=winner, shape=params[0], scale=params[1], scores=scores)


@dataclass(frozen=True)
class MuLengthRelation:
    """Smoothed map from local mean to expected segment length."""

    curve: LoessCurve

    def expected_length(self, mu):
        return self.curve.evaluate(mu)


@dataclass
class MixtureModel:
    """Everything needed to evaluate the long-term volume distribution."""

    family: Family
    lengths: np.ndarray
    phis: np.ndarray
    thetas: np.ndarray
    total_length: float = None
    length_law: LengthLaw = None
    theta_prior: ThetaPrior = None
    mu_omega: MuOmegaRelation = None
    mu_length: MuLengthRelation = None

    def __post_init__(self):
        self.family = Family(self.family)
        self.lengths = as_float_array(self.lengths, "lengths", min_len=1)
        self.phis = as_float_array(self.phis, "phis")
        self.thetas = as_float_array(self.thetas, "thetas")
        if not (self.lengths.size == self.phis.size == self.thetas.size):
            raise ValueError("lengths, phis and thetas must be paired")
        require_all_positive(self.thetas, "thetas")
        total = float(np.sum(self.lengths))
        if self.total_length is None:
            self.total_length = total
        elif not math.isclose(self.total_length, total, rel_tol=1e-12):
            raise ValueError(
                f"total_length {self.total_length} != sum of lengths {total}"
            )

    @property
    def n_segments(self):
        return self.lengths.size

    def to_dict(self):
        def curve_dict(curve):
            return {
                "x": curve.x.tolist(),
                "y_hat": curve.y_hat.tolist(),
                "residuals": curve.residuals.tolist(),
                "robustness_weights": curve.robustness_weights.tolist(),
            }

        out = {
            "family": self.family.value,
            "lengths": self.lengths.tolist(),
            "phis": self.phis.tolist(),
            "thetas": self.thetas.tolist(),
            "total_length": self.total_length,
            "length_law": None,
            "theta_prior": None,
            "mu_omega": None,
            "mu_length": None,
        }
        if self.length_law is not None:
            law = self.length_law
            out["length_law"] = {
                "lam": law.lam,
                "ell_min": law.ell_min,
                "tail_break": law.tail_break,
                "tail_fraction": law.tail_fraction,
            }
        if self.theta_prior is not None:
            prior = self.theta_prior
            out["theta_prior"] = {
                "family": prior.family.value,
                "shape": prior.shape,
                "scale": prior.scale,
                "scores": prior.scores,
            }
        if self.mu_omega is not None:
            rel = self.mu_omega
            out["mu_omega"] = {
                "mode": rel.mode,
                "alpha_low": rel.alpha_low,
                "beta_low": rel.beta_low,
                "sigma_low": rel.sigma_low,
                "alpha_high": rel.alpha_high,
                "beta_high": rel.beta_high,
                "sigma_high": rel.sigma_high,
                "crossover": rel.crossover,
            }
        if self.mu_length is not None:
            out["mu_length"] = curve_dict(self.mu_length.curve)
        return out

    @classmethod
    def from_dict(cls, data):
        length_law = None
        if data.get("length_law"):
            length_law = LengthLaw(**data["length_law"])
        theta_prior = None
        if data.get("theta_prior"):
            d = dict(data["theta_prior"])
            d["family"] = Family(d["family"])
            theta_prior = ThetaPrior(**d)
        mu_omega = None
        if data.get("mu_omega"):
            mu_omega = MuOmegaRelation(**data["mu_omega"])
        mu_length = None
        if data.get("mu_length"):
            d = data["mu_length"]
            mu_length = MuLengthRelation(
                LoessCurve(
                    x=np.asarray(d["x"]),
                    y_hat=np.asarray(d["y_hat"]),
                    residuals=np.asarray(d["residuals"]),
                    robustness_weights=np.asarray(d["robustness_weights"]),
                )
            )
        return cls(
            family=Family(data["family"]),
            lengths=np.asarray(data["lengths"]),
            phis=np.asarray(data["phis"]),
            thetas=np.asarray(data["thetas"]),
            total_length=data.get("total_length"),
            length_law=length_law,
            theta_prior=theta_prior,
            mu_omega=mu_omega,
            mu_length=mu_length,
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class VolatilityPrior:
    """Inverse-gamma law of the squared volatility (local return variance)."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("volatility prior parameters must be positive")

    def pdf(self, sigma2):
        return pdf(Family.INVGAMMA, (self.shape, self.scale), sigma2)

    def support_interval(self, tail_mass=_TAIL_MASS):
        dist = scipy_dist(Family.INVGAMMA, (self.shape, self.scale))
        return float(dist.ppf(tail_mass)), float(dist.isf(tail_mass))


def long_term_pdf_weighted(model: MixtureModel, v):
    """Length-weighted mixture of the fitted local densities."""
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros(v_arr.shape)
    for ell, phi, theta in zip(model.lengths, model.phis, model.thetas):
        out += ell * pdf(model.family, (phi, theta), v_arr)
    out /= model.total_length
    return float(out[0]) if np.isscalar(v) else out


def long_term_cdf_weighted(model: MixtureModel, v):
    """CDF of the length-weighted mixture."""
    from .distributions import cdf as _cdf

    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros(v_arr.shape)
    for ell, phi, theta in zip(model.lengths, model.phis, model.thetas):
        out += ell * _cdf(model.family, (phi, theta), v_arr)
    out /= model.total_length
    return float(out[0]) if np.isscalar(v) else out


def _lognormal_pdf_scalar(v, phi, theta):
    if v <= 0.0:
        return 0.0
    lv = math.log(v)
    return math.exp(-((lv - phi) ** 2) / (2.0 * theta * theta)) / (
        math.sqrt(2.0 * math.pi) * theta * v
    )


def long_term_pdf_integral(model: MixtureModel, v, abs_tol=1e-8):
    """Long-term density as an integral over the scale-parameter prior.

    Valid under the single-mode (linear) mean-variance relation: the local
    location parameter collapses to phi_of_theta and the segment length
    integrates out, leaving a one-dimensional quadrature over the prior.
    """
    if model.theta_prior is None or model.mu_omega is None:
        raise ValueError("model needs a theta prior and a mu-omega relation")
    if model.mu_omega.mode != "single":
        raise ValueError(
            "integral evaluator requires the single-mode mu-omega relation"
        )
    if model.family is not Family.LOGNORMAL:
        raise ValueError("integral evaluator is defined for the lognormal local law")
    alpha = model.mu_omega.alpha_low
    beta = model.mu_omega.beta_low
    prior = model.theta_prior
    lo, hi = prior.support_interval()
    lo = max(lo, 1e-300)
    shape, scale = prior.shape, prior.scale
    prior_family = prior.family

    def prior_pdf(theta):
        return pdf(prior_family, (shape, scale), theta)

    def density_at(v_scalar):
        if v_scalar <= 0:
            raise ValueError("v must be positive")

        def integrand(theta):
            return _lognormal_pdf_scalar(
                v_scalar, phi_of_theta(theta, alpha, beta), theta
            ) * float(prior_pdf(theta))

        return _quad_checked(integrand, lo, hi, abs_tol)

    if np.isscalar(v):
        return density_at(float(v))
    return np.array([density_at(float(vi)) for vi in np.asarray(v, dtype=float)])


def long_term_cdf_integral(model: MixtureModel, v, abs_tol=1e-8):
    """CDF of the prior-integral evaluator (single-mode relation only)."""
    if model.theta_prior is None or model.mu_omega is None:
        raise ValueError("model needs a theta prior and a mu-omega relation")
    if model.mu_omega.mode != "single":
        raise ValueError(
            "integral evaluator requires the single-mode mu-omega relation"
        )
    alpha = model.mu_omega.alpha_low
    beta = model.mu_omega.beta_low
    prior = model.theta_prior
    lo, hi = prior.support_interval()
    lo = max(lo, 1e-300)
    shape, scale = prior.shape, prior.scale
    prior_family = prior.family

    def cdf_at(v_scalar):
        if v_scalar <= 0:
            return 0.0
        lv = math.log(v_scalar)

        def integrand(theta):
            z = (lv - phi_of_theta(theta, alpha, beta)) / theta
            return float(special.ndtr(z)) * float(
                pdf(prior_family, (shape, scale), theta)
            )

        return _quad_checked(integrand, lo, hi, abs_tol)

    if np.isscalar(v):
        return cdf_at(float(v))
    return np.array([cdf_at(float(vi)) for vi in np.asarray(v, dtype=float)])


def return_mixture_pdf(prior: VolatilityPrior, r, kernel="laplace", rel_tol=1e-8):
    """Mix a zero-centered local return law over the volatility prior.

    The squared volatility carries the prior; the local law is a Laplace
    density with matching variance, or a Gaussian for the comparison
    variant. The integration runs in log-volatility space so both the
    prior bulk and the kernel-relevant region are resolved.
    """
    if kernel not in ("laplace", "gaussian"):
        raise ValueError(f"unknown kernel {kernel!r}")
    lo, hi = prior.support_interval()
    shape, scale = prior.shape, prior.scale

    def density_at(r_scalar):
        top = max(hi, 200.0 * (r_scalar * r_scalar + scale))
        log_lo, log_hi = math.log(lo), math.log(top)

        def integrand(log_s2):
            s2 = math.exp(log_s2)
            w = math.exp(
                shape * math.log(scale)
                - special.gammaln(shape)
                - (shape + 1.0) * log_s2
                - scale / s2
            )
            if kernel == "laplace":
                b = math.sqrt(s2 / 2.0)
                k = math.exp(-abs(r_scalar) / b) / (2.0 * b)
            else:
                k = math.exp(-r_scalar * r_scalar / (2.0 * s2)) / math.sqrt(
                    2.0 * math.pi * s2
                )
            return k * w * s2  # jacobian of the log substitution

        return _quad_checked(integrand, log_lo, log_hi, 1e-12, rel_tol)

    if np.isscalar(r):
        return density_at(float(r))
    return np.array([density_at(float(ri)) for ri in np.asarray(r, dtype=float)])
