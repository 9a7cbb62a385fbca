"""Ground-truth synthetic generators for closed-loop validation.

Volume series are built by drawing patch lengths from the shifted
exponential law, local scale parameters from the configured prior, local
locations through the mean-variance relation (plus Gaussian scatter on the
log-mean), and finally per-patch draws from the local family. Returns use
zero-centered Laplace patches whose squared volatility follows an
inverse-gamma prior; the coupled generator adds sign and magnitude layers
driven by the volume path. Patch draws use per-patch spawned generators,
so output is independent of evaluation order.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .distributions import Family, sample
from .mixture import (
    LengthLaw,
    MixtureModel,
    MuOmegaRelation,
    ThetaPrior,
    VolatilityPrior,
    phi_of_theta,
)
from .segmentation import Segmentation
from .series import MINUTES_PER_DAY, ReturnSeries, Series, TradingCalendar


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters; defaults follow the reference market estimates."""

    seed: int = 0
    n_points: int = 50_000
    ell_min: int = 30
    lam: float = 116.0
    theta_prior_family: Family = Family.GAMMA
    theta_shape: float = 32.8
    theta_scale: float = 0.028
    alpha: float = 0.45
    beta: float = 0.03
    sigma_eta: float = 0.28
    dual_relation: MuOmegaRelation = None
    local_family: Family = Family.LOGNORMAL
    return_lam: float = 77.0
    vol_shape: float = 2.5
    vol_scale: float = 4e-3
    sign_plus: tuple = (0.47, 1.22, 0.25)
    sign_minus: tuple = (0.40, 2.56, 0.30)
    impact_a: float = 0.056
    impact_b: float = 0.0062
    impact_sigma: float = 0.02
    calendar: TradingCalendar = field(default_factory=TradingCalendar)

    def __post_init__(self):
        if self.n_points < 2 * self.ell_min:
            raise ValueError("n_points must be at least twice ell_min")
        for name in ("lam", "theta_shape", "theta_scale", "return_lam",
                     "vol_shape", "vol_scale", "impact_sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma_eta < 0:
            raise ValueError("sigma_eta must be non-negative")
        if self.dual_relation is not None and self.dual_relation.mode != "dual":
            raise ValueError("dual_relation must be a dual-mode relation")


def _session_timestamps(n, calendar):
    k = np.arange(n, dtype=np.int64)
    session = calendar.session_length
    return (k // session) * MINUTES_PER_DAY + calendar.open_minute + (k % session)


def _draw_lengths(rng, n_total, lam, ell_min):
    """Patch lengths covering exactly n_total samples, all >= ell_min."""
    lengths = []
    covered = 0
    while covered < n_total:
        ell = ell_min + int(round(rng.exponential(lam)))
        if covered + ell > n_total:
            ell = n_total - covered
        lengths.append(ell)
        covered += ell
    if len(lengths) > 1 and lengths[-1] < ell_min:
        lengths[-2] += lengths[-1]
        lengths.pop()
    return np.asarray(lengths, dtype=np.int64)


def _dual_phi(theta, relation):
    """Pick the branch of a dual relation consistent with its own variance."""
    crossover = relation.crossover
    out = np.empty(theta.shape)
    for i, th in enumerate(theta):
        t2 = th * th
        log_em1 = math.log(math.expm1(t2)) if t2 < 1 else t2 + math.log1p(-math.exp(-t2))
        cands = []
        for alpha, beta_, side in (
            (relation.alpha_low, relation.beta_low, -1),
            (relation.alpha_high, relation.beta_high, 1),
        ):
            phi = phi_of_theta(th, alpha, beta_)
            log_omega = log_em1 + 2.0 * phi + t2
            consistent = (log_omega <= crossover) if side < 0 else (log_omega > crossover)
            cands.append((consistent, abs(log_omega - crossover), phi))
        valid = [c for c in cands if c[0]]
        if len(valid) == 1:
            out[i] = valid[0][2]
        elif len(valid) == 2:
            out[i] = max(valid, key=lambda c: c[1])[2]
        else:
            out[i] = min(cands, key=lambda c: c[1])[2]
    return out


@dataclass(frozen=True)
class VolumeTruth:
    """Generating record for a synthetic volume series."""

    lengths: np.ndarray
    cuts: np.ndarray
    phis: np.ndarray
    thetas: np.ndarray
    spec: SynthSpec

    def segmentation(self, values) -> Segmentation:
        return Segmentation.from_values(values, self.cuts)

    def weighted_model(self) -> MixtureModel:
        spec = self.spec
        if spec.dual_relation is not None:
            relation = spec.dual_relation
        else:
            relation = MuOmegaRelation(
                mode="single",
                alpha_low=spec.alpha,
                beta_low=spec.beta,
                sigma_low=spec.sigma_eta,
            )
        return MixtureModel(
            family=spec.local_family,
            lengths=self.lengths.astype(float),
            phis=self.phis,
            thetas=self.thetas,
            length_law=LengthLaw(lam=spec.lam, ell_min=spec.ell_min),
            theta_prior=ThetaPrior(
                family=spec.theta_prior_family,
                shape=spec.theta_shape,
                scale=spec.theta_scale,
            ),
            mu_omega=relation,
        )


def generate_volume(spec: SynthSpec):
    """Synthesize a volume series plus its generating truth record."""
    root = np.random.SeedSequence(spec.seed)
    meta_seq, patch_root = root.spawn(2)
    meta_rng = np.random.default_rng(meta_seq)
    lengths = _draw_lengths(meta_rng, spec.n_points, spec.lam, spec.ell_min)
    n_seg = lengths.size
    thetas = sample(
        spec.theta_prior_family, (spec.theta_shape, spec.theta_scale), n_seg, meta_rng
    )
    if spec.dual_relation is not None:
        phis = _dual_phi(thetas, spec.dual_relation)
    else:
        phis = phi_of_theta(thetas, spec.alpha, spec.beta)
    if spec.sigma_eta > 0:
        phis = phis + meta_rng.normal(0.0, spec.sigma_eta, n_seg)
    values = np.empty(spec.n_points)
    pos = 0
    for child, ell, phi, theta in zip(
        patch_root.spawn(n_seg), lengths, phis, thetas
    ):
        rng = np.random.default_rng(child)
        values[pos : pos + ell] = sample(spec.local_family, (phi, theta), ell, rng)
        pos += ell
    series = Series(
        timestamps=_session_timestamps(spec.n_points, spec.calendar),
        values=values,
        calendar=spec.calendar,
    )
    cuts = np.cumsum(lengths)[:-1]
    truth = VolumeTruth(
        lengths=lengths, cuts=cuts, phis=np.asarray(phis), thetas=thetas, spec=spec
    )
    return series, truth


@dataclass(frozen=True)
class ReturnTruth:
    lengths: np.ndarray
    cuts: np.ndarray
    sigma2s: np.ndarray  # local variance (squared volatility) per patch
    spec: SynthSpec

    def volatility_prior(self) -> VolatilityPrior:
        return VolatilityPrior(shape=self.spec.vol_shape, scale=self.spec.vol_scale)


def generate_returns(spec: SynthSpec):
    """Synthesize a return series: Laplace patches over an inverse-gamma prior."""
    root = np.random.SeedSequence(spec.seed)
    meta_seq, patch_root = root.spawn(2)
    meta_rng = np.random.default_rng(meta_seq)
    lengths = _draw_lengths(meta_rng, spec.n_points, spec.return_lam, spec.ell_min)
    n_seg = lengths.size
    sigma2s = sample(
        Family.INVGAMMA, (spec.vol_shape, spec.vol_scale), n_seg, meta_rng
    )
    values = np.empty(spec.n_points)
    pos = 0
    for child, ell, s2 in zip(patch_root.spawn(n_seg), lengths, sigma2s):
        rng = np.random.default_rng(child)
        values[pos : pos + ell] = rng.laplace(0.0, math.sqrt(s2 / 2.0), ell)
        pos += ell
    series = ReturnSeries(
        timestamps=_session_timestamps(spec.n_points, spec.calendar),
        values=values,
        calendar=spec.calendar,
    )
    cuts = np.cumsum(lengths)[:-1]
    return series, ReturnTruth(
        lengths=lengths, cuts=cuts, sigma2s=sigma2s, spec=spec
    )


@dataclass(frozen=True)
class CoupledTruth:
    volume: VolumeTruth
    spec: SynthSpec


def generate_coupled(spec: SynthSpec):
    """Volume series plus returns driven by it through sign and impact layers.

    Per minute the move/no-move and sign outcomes follow the configured
    saturating sign probabilities of the current volume; magnitudes are
    the log impact plus Gaussian noise, truncated positive.
    """
    volume, vol_truth = generate_volume(spec)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed).spawn(3)[2])
    v = volume.values
    log_v = np.log(v)
    gp, wp, bp = spec.sign_plus
    gm, wm, bm = spec.sign_minus
    p_plus = gp * np.tanh(wp * np.power(v, bp))
    p_minus = gm * np.tanh(wm * np.power(v, bm))
    u = rng.uniform(size=v.size)
    sign = np.zeros(v.size)
    sign[u < p_plus] = 1.0
    sign[(u >= p_plus) & (u < p_plus + p_minus)] = -1.0
    mean_mag = spec.impact_a + spec.impact_b * log_v
    lo = special.ndtr(-mean_mag / spec.impact_sigma)
    w = rng.uniform(size=v.size)
    z = special.ndtri(lo + w * (1.0 - lo))
    magnitudes = mean_mag + spec.impact_sigma * z
    returns = ReturnSeries(
        timestamps=volume.timestamps,
        values=sign * magnitudes,
        calendar=spec.calendar,
    )
    return volume, returns, CoupledTruth(volume=vol_truth, spec=spec)


def generate_mu_omega_scatter(relation: MuOmegaRelation, n, log_omega_span, seed=0):
    """Sample (mu, omega) pairs from a mean-variance relation with scatter.

    log-variances are uniform over `log_omega_span`; log-means follow the
    relation plus branch-specific Gaussian noise. Used to exercise the
    relation-fitting machinery against known coefficients.
    """
    rng = np.random.default_rng(seed)
    lo, hi = log_omega_span
    log_omega = rng.uniform(lo, hi, n)
    log_mu = relation.log_mu(log_omega)
    if relation.mode == "dual":
        sigma = np.where(
            log_omega > relation.crossover, relation.sigma_high, relation.sigma_low
        )
    else:
        sigma = relation.sigma_low
    log_mu = log_mu + rng.normal(0.0, 1.0, n) * sigma
    return np.exp(log_mu), np.exp(log_omega)


def ushape_band_mass(strength, edges):
    """Mass of the U-shaped start intensity over bands of the unit session.

    Density f(u) = (1 + strength (2u-1)^2) / (1 + strength/3) on [0, 1].
    """
    edges = np.asarray(edges, dtype=float)

    def cdf(u):
        return (u + strength * ((2 * u - 1) ** 3 + 1) / 6.0) / (1.0 + strength / 3.0)

    return cdf(edges[1:]) - cdf(edges[:-1])


def ushape_offsets(n, strength, session_length, seed=0):
    """Sample session offsets whose intensity is U-shaped across the session."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, 8193)
    cdf = (grid + strength * ((2 * grid - 1) ** 3 + 1) / 6.0) / (1.0 + strength / 3.0)
    u = np.interp(rng.uniform(size=n), cdf, grid)
    return u * session_length
