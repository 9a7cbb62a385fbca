"""Quasi-stationary patch segmentation and superstatistical mixtures."""

from .distributions import (
    Family,
    FitError,
    FitResult,
    NormalityReport,
    fit_mle,
    gof_lilliefors,
    ks_significance,
    lognormal_moments,
    normality_tests,
    pdf,
)
from .dynamics import autocorr, intraday_profile, length_fluctuations, length_vs_mean
from .impact import (
    HomogeneityReport,
    ImpactFit,
    SignProbModel,
    fit_impact,
    fit_sign_prob,
    homogeneity,
    return_pdf_from_volume,
)
from .loess import LoessConfig, LoessCurve, LoessRegression, loess_fit, tricube
from .mixture import (
    LengthLaw,
    MixtureModel,
    MuLengthRelation,
    MuOmegaRelation,
    ThetaPrior,
    VolatilityPrior,
    fit_length_law,
    fit_mu_omega,
    fit_theta_prior,
    long_term_pdf_integral,
    long_term_pdf_weighted,
    phi_of_theta,
    return_mixture_pdf,
)
from .segmentation import (
    KolmogorovSmirnovSegmenter,
    KssConfig,
    Segmentation,
    critical_value,
    find_best_cut,
    ks_distance,
    segment_series,
    weighted_ks_statistic,
)
from .series import (
    NormalizedVolumeSeries,
    ReturnSeries,
    Series,
    TradingCalendar,
    magnitude,
    normalize_volume,
    price_to_returns,
)
from .synth import (
    SynthSpec,
    generate_coupled,
    generate_mu_omega_scatter,
    generate_returns,
    generate_volume,
)

__version__ = "0.1.0"
