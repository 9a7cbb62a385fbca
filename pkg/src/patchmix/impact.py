"""Volume / price-fluctuation relation: sign probabilities, trading-impact
fits, homogeneity across segments, and the reconstruction of the
magnitude-of-return distribution from the volume statistics.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special
from scipy.optimize import curve_fit

from .loess import LoessConfig, loess_fit
from .mixture import MixtureModel, _quad_checked, long_term_pdf_weighted
from .validation import as_float_array, check_paired

IMPACT_FORMS = ("log", "power", "exp")


@dataclass(frozen=True)
class SignCurve:
    """Saturating sign-probability curve: plateau * tanh(scale * v^exponent)."""

    plateau: float
    scale: float
    exponent: float

    def __post_init__(self):
        if not 0.0 <= self.plateau <= 1.0:
            raise ValueError("plateau must lie in [0, 1]")
        if self.scale <= 0 or self.exponent <= 0:
            raise ValueError("scale and exponent must be positive")

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = self.plateau * np.tanh(self.scale * np.power(np.maximum(v, 0.0), self.exponent))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SignProbModel:
    """Fitted probabilities of positive/negative/zero price moves given volume."""

    plus: SignCurve
    minus: SignCurve
    bin_volumes: np.ndarray = None
    bin_freq_plus: np.ndarray = None
    bin_freq_minus: np.ndarray = None

    def __post_init__(self):
        if self.plus.plateau + self.minus.plateau > 1.0 + 1e-9:
            raise ValueError("plateau probabilities must sum to at most 1")

    def g_plus(self, v):
        return self.plus(v)

    def g_minus(self, v):
        return self.minus(v)

    def g_zero(self, v):
        return 1.0 - self.plus(v) - self.minus(v)


def _tanh_form(v, plateau, scale, exponent):
    return plateau * np.tanh(scale * np.power(v, exponent))


def _fit_sign_curve(v, freq):
    if np.all(freq == 0.0):
        return SignCurve(plateau=0.0, scale=1.0, exponent=1.0)
    p0 = (min(max(float(freq.max()), 0.05), 1.0), 1.0, 0.3)
    params, _ = curve_fit(
        _tanh_form,
        v,
        freq,
        p0=p0,
        bounds=([0.0, 1e-8, 1e-8], [1.0, 1e3, 1e2]),
        maxfev=20000,
    )
    return SignCurve(plateau=float(params[0]), scale=float(params[1]),
                     exponent=float(params[2]))


def fit_sign_prob(volumes, returns, bins: int = 50) -> SignProbModel:
    """Fit the sign-probability curves from volume-binned sign frequencies.

    Volumes are chunked into equal-occupancy bins; within each bin the
    frequencies of positive and negative returns are matched by least
    squares against the saturating tanh form, separately per sign.
    """
    v = as_float_array(volumes, "volumes", min_len=2)
    r = as_float_array(returns, "returns")
    check_paired(v, r, "volumes", "returns")
    if bins < 20:
        raise ValueError("need at least 20 bins")
    if v.size < bins:
        raise ValueError(f"need at least {bins} observations for {bins} bins")
    order = np.argsort(v, kind="stable")
    bin_of = (np.arange(v.size) * bins) // v.size
    vb = np.empty(bins)
    fplus = np.empty(bins)
    fminus = np.empty(bins)
    vs = v[order]
    rs = r[order]
    for b in range(bins):
        mask = bin_of == b
        vb[b] = vs[mask].mean()
        fplus[b] = np.mean(rs[mask] > 0)
        fminus[b] = np.mean(rs[mask] < 0)
    return SignProbModel(
        plus=_fit_sign_curve(vb, fplus),
        minus=_fit_sign_curve(vb, fminus),
        bin_volumes=vb,
        bin_freq_plus=fplus,
        bin_freq_minus=fminus,
    )


@dataclass(frozen=True)
class ImpactFit:
    """One functional form fitted to the smoothed impact curve.

    Forms: 'log' I = a + b ln v; 'power' ln I = a + b ln v;
    'exp' ln I = a + b v. chi2_per_dof is the residual measure in the
    regression space of the form.
    """

    form: str
    a: float
    b: float
    chi2_per_dof: float
    sign: str
    n_points: int
    is_best: bool = False

    def __post_init__(self):
        if self.form not in IMPACT_FORMS:
            raise ValueError(f"unknown impact form {self.form!r}")
        if self.chi2_per_dof < 0:
            raise ValueError("chi2 must be non-negative")

    def expected_magnitude(self, v):
        v = np.asarray(v, dtype=float)
        if self.form == "log":
            out = self.a + self.b * np.log(v)
        elif self.form == "power":
            out = np.exp(self.a + self.b * np.log(v))
        else:
            out = np.exp(self.a + self.b * v)
        return float(out) if out.ndim == 0 else out


def _regress(x, y):
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate abscissa for impact regression")
    b = float(np.sum((x - xm) * (y - ym)) / sxx)
    a = float(ym - b * xm)
    resid = y - (a + b * x)
    chi2 = float(np.sum(resid**2)) / max(y.size - 2, 1)
    return a, b, chi2


def fit_impact(volumes, abs_returns, sign="+", config: LoessConfig = None):
    """Fit the three impact forms to the loess-smoothed |r| vs v curve.

    Returns the three fits ordered (log, power, exp) with the minimal
    chi-squared form flagged. Zero returns must be excluded by the caller;
    any remaining are dropped.
    """
    v = as_float_array(volumes, "volumes")
    r = as_float_array(abs_returns, "abs_returns")
    check_paired(v, r, "volumes", "abs_returns")
    keep = r > 0
    v, r = v[keep], r[keep]
    if v.size < 10:
        raise ValueError("need at least 10 nonzero observations")
    curve = loess_fit(v, r, config or LoessConfig())
    x = curve.x
    y = curve.y_hat
    if x.size < 10:
        raise ValueError("fewer than 10 smoothed points")
    log_v = np.log(x)
    fits = []
    a, b, chi2 = _regress(log_v, y)
    fits.append(ImpactFit("log", a, b, chi2, sign, x.size))
    pos = y > 0
    if np.sum(pos) < 10:
        raise ValueError("fewer than 10 positive smoothed points for the log forms")
    a, b, chi2 = _regress(log_v[pos], np.log(y[pos]))
    fits.append(ImpactFit("power", a, b, chi2, sign, int(np.sum(pos))))
    a, b, chi2 = _regress(x[pos], np.log(y[pos]))
    fits.append(ImpactFit("exp", a, b, chi2, sign, int(np.sum(pos))))
    best = min(range(3), key=lambda i: fits[i].chi2_per_dof)
    fits[best] = replace(fits[best], is_best=True)
    return fits


def impact_residual_sd(volumes, abs_returns, fit: ImpactFit) -> float:
    """Standard deviation of log-form residuals on the unsmoothed scatter."""
    if fit.form != "log":
        raise ValueError("residual scale is defined for the log impact form")
    v = as_float_array(volumes, "volumes")
    r = as_float_array(abs_returns, "abs_returns")
    check_paired(v, r, "volumes", "abs_returns")
    keep = r > 0
    resid = r[keep] - (fit.a + fit.b * np.log(v[keep]))
    return float(np.std(resid))


@dataclass(frozen=True)
class ParameterHomogeneity:
    slope: float          # OLS slope of the parameter against segment length
    slope_se: float
    loess_slope: float    # end-to-end slope of the loess curve
    edf_normal_distance: float  # sup distance of the detrended EDF to the normal
    n: int


@dataclass(frozen=True)
class HomogeneityReport:
    a: ParameterHomogeneity
    b: ParameterHomogeneity


def _edf_normal_distance(z):
    z = np.sort(z)
    n = z.size
    f = special.ndtr(z)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _parameter_homogeneity(lengths, values, config):
    x = lengths.astype(float)
    y = values
    xm = x.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate segment lengths")
    slope = float(np.sum((x - xm) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xm)
    resid = y - (intercept + slope * x)
    sigma2 = float(np.sum(resid**2)) / max(x.size - 2, 1)
    slope_se = float(np.sqrt(sigma2 / sxx))
    curve = loess_fit(x, y, config)
    span = curve.x[-1] - curve.x[0]
    loess_slope = float((curve.y_hat[-1] - curve.y_hat[0]) / span) if span > 0 else 0.0
    sd = float(np.std(resid))
    if sd == 0.0:
        distance = 1.0  # point mass is maximally far from the normal EDF-wise
    else:
        distance = _edf_normal_distance(resid / sd)
    return ParameterHomogeneity(
        slope=slope,
        slope_se=slope_se,
        loess_slope=loess_slope,
        edf_normal_distance=distance,
        n=x.size,
    )


def homogeneity(lengths, a_values, b_values, config: LoessConfig = None):
    """Relate per-segment impact parameters to segment length.

    For each parameter: linear slope against length with its standard
    error, the loess-curve slope, and the sup distance between the EDF of
    the detrended, normalized parameter values and the standard normal.
    """
    ell = as_float_array(lengths, "lengths", min_len=20)
    a_vals = as_float_array(a_values, "a_values")
    b_vals = as_float_array(b_values, "b_values")
    check_paired(ell, a_vals, "lengths", "a_values")
    check_paired(ell, b_vals, "lengths", "b_values")
    config = config or LoessConfig()
    return HomogeneityReport(
        a=_parameter_homogeneity(ell, a_vals, config),
        b=_parameter_homogeneity(ell, b_vals, config),
    )


@dataclass(frozen=True)
class ReturnFromVolume:
    """Reconstruction of the |r| distribution: zero atom plus density curve."""

    r: np.ndarray
    density: np.ndarray
    zero_atom: float
    total_mass: float


def return_pdf_from_volume(
    model: MixtureModel,
    sign_model: SignProbModel,
    impact: ImpactFit,
    sigma_eta: float,
    r_grid,
    abs_tol=1e-8,
) -> ReturnFromVolume:
    """Reconstruct the magnitude-of-return law from the volume statistics.

    The zero atom integrates the no-move probability against the long-term
    volume density; for |r| > 0 a Gaussian kernel centered on the fitted
    log impact, truncated to positive magnitudes and renormalized, is mixed
    over volume. Atom plus density integrate to one up to quadrature error.
    """
    if impact.form != "log":
        raise ValueError("reconstruction requires the log impact form")
    if sigma_eta <= 0:
        raise ValueError("sigma_eta must be positive")
    grid = as_float_array(r_grid, "r_grid", min_len=1)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("r_grid must be positive and increasing")

    z = 7.1  # ~1e-12 normal tail per component
    log_lo = float(np.min(model.phis - z * model.thetas))
    log_hi = float(np.max(model.phis + z * model.thetas))

    def p_v(v):
        return float(long_term_pdf_weighted(model, v))

    def atom_integrand(log_v):
        v = math.exp(log_v)
        return sign_model.g_zero(v) * p_v(v) * v

    zero_atom = _quad_checked(atom_integrand, log_lo, log_hi, abs_tol)

    a, b = impact.a, impact.b

    def density_at(r_val):
        def integrand(log_v):
            v = math.exp(log_v)
            m = a + b * log_v
            # Gaussian truncated to positive magnitudes
            norm = special.ndtr(m / sigma_eta)
            if norm <= 0.0:
                return 0.0
            kern = (
                math.exp(-((r_val - m) ** 2) / (2.0 * sigma_eta**2))
                / (math.sqrt(2.0 * math.pi) * sigma_eta)
                / norm
            )
            move = sign_model.g_plus(v) + sign_model.g_minus(v)
            return kern * move * p_v(v) * v

        return _quad_checked(integrand, log_lo, log_hi, abs_tol)

    density = np.array([density_at(float(r)) for r in grid])

    m_max = a + b * (log_hi if b >= 0 else log_lo)
    upper = max(float(grid[-1]), m_max + 12.0 * sigma_eta, 12.0 * sigma_eta)
    mass_of_moves = _quad_checked(
        lambda r_val: density_at(r_val), 0.0, upper, abs_tol * 10
    )
    return ReturnFromVolume(
        r=grid,
        density=density,
        zero_atom=zero_atom,
        total_mass=zero_atom + mass_of_moves,
    )
