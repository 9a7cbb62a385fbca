import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from patchmix.distributions import (
    Family,
    FitError,
    FitResult,
    POSITIVE_FAMILIES,
    VOLUME_FAMILIES,
    cdf,
    fit_mle,
    gof_lilliefors,
    kolmogorov_quantile,
    ks_significance,
    lognormal_moments,
    logpdf,
    normality_tests,
    pdf,
    sample,
)

RNG_PARAMS = {
    Family.GAMMA: (2.5, 0.8),
    Family.LOGNORMAL: (0.3, 0.9),
    Family.INVGAMMA: (3.0, 1.5),
    Family.WEIBULL: (1.7, 1.2),
    Family.INVWEIBULL: (2.2, 0.7),
    Family.LAPLACE: (0.5, 1.3),
    Family.GAUSSIAN: (-0.2, 0.7),
}


class TestPdf:
    def test_lognormal_standard_at_one(self):
        assert pdf(Family.LOGNORMAL, (0.0, 1.0), 1.0) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), abs=1e-12
        )

    def test_weibull_shape_one_is_exponential(self):
        x = np.array([0.1, 0.5, 2.0, 5.0])
        np.testing.assert_allclose(pdf(Family.WEIBULL, (1.0, 1.0), x), np.exp(-x))

    def test_gamma_shape_one_at_origin(self):
        assert pdf(Family.GAMMA, (1.0, 2.0), 1e-12) == pytest.approx(0.5, rel=1e-9)

    def test_out_of_support_is_zero(self):
        for family in POSITIVE_FAMILIES:
            assert pdf(family, RNG_PARAMS[family], -1.0) == 0.0
            assert pdf(family, RNG_PARAMS[family], 0.0) == 0.0

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            pdf(Family.GAMMA, (-1.0, 1.0), 1.0)
        with pytest.raises(ValueError):
            pdf(Family.GAUSSIAN, (0.0, 0.0), 1.0)

    def test_matches_scipy_everywhere(self):
        from patchmix.distributions import scipy_dist

        rng = np.random.default_rng(1)
        for family, params in RNG_PARAMS.items():
            x = rng.uniform(0.05, 5.0, 50)
            if family not in POSITIVE_FAMILIES:
                x = x - 2.0
            np.testing.assert_allclose(
                pdf(family, params, x), scipy_dist(family, params).pdf(x), rtol=1e-10
            )
            np.testing.assert_allclose(
                cdf(family, params, x), scipy_dist(family, params).cdf(x), rtol=1e-9,
                atol=1e-12,
            )

    def test_integrates_to_one(self):
        rng = np.random.default_rng(2)
        for family in Family:
            for _ in range(10):
                p1 = rng.uniform(0.5, 5.0)
                p2 = rng.uniform(0.2, 3.0)
                if family in POSITIVE_FAMILIES:
                    lo, hi = 0.0, np.inf
                else:
                    p1 = rng.uniform(-2, 2)
                    lo, hi = -np.inf, np.inf
                total, _ = quad(
                    lambda x: pdf(family, (p1, p2), x), lo, hi, limit=200
                )
                assert total == pytest.approx(1.0, abs=1e-6), (family, p1, p2)

    def test_inverse_families_change_of_variables(self):
        # density of X equals density of 1/X times the jacobian 1/x^2
        rng = np.random.default_rng(3)
        x = rng.uniform(0.2, 4.0, 20)
        np.testing.assert_allclose(
            pdf(Family.INVGAMMA, (2.5, 1.4), x),
            pdf(Family.GAMMA, (2.5, 1.0 / 1.4), 1.0 / x) / x**2,
            rtol=1e-10,
        )
        np.testing.assert_allclose(
            pdf(Family.INVWEIBULL, (1.8, 0.9), x),
            pdf(Family.WEIBULL, (1.8, 0.9), 1.0 / x) / x**2,
            rtol=1e-10,
        )


class TestFitMle:
    def test_lognormal_degenerate(self):
        with pytest.raises(FitError, match="lognormal"):
            fit_mle(Family.LOGNORMAL, np.ones(10))

    def test_laplace_closed_form(self):
        res = fit_mle(Family.LAPLACE, [-1.0, 0.0, 1.0, 0.0, 0.0])
        assert res.params[0] == 0.0
        assert res.params[1] == pytest.approx(0.4)
        res = fit_mle(Family.LAPLACE, [-1.0, 0.0, 1.0, -1.0, 1.0, 0.0])
        assert res.params[1] == pytest.approx(2.0 / 3.0)

    def test_gamma_recovery(self):
        rng = np.random.default_rng(4)
        data = rng.gamma(3.0, 0.5, 10_000)
        res = fit_mle(Family.GAMMA, data)
        assert res.params[0] == pytest.approx(3.0, abs=0.15)
        assert res.params[1] == pytest.approx(0.5, abs=0.03)

    @pytest.mark.parametrize("family", list(Family))
    def test_mle_beats_truth(self, family):
        rng = np.random.default_rng(5)
        params = RNG_PARAMS[family]
        data = sample(family, params, 2000, rng)
        res = fit_mle(family, data)
        ll_true = float(np.sum(logpdf(family, params, data)))
        assert res.log_likelihood >= ll_true - 1e-7

    @pytest.mark.parametrize("family", list(Family))
    def test_recovery_all_families(self, family):
        rng = np.random.default_rng(6)
        params = RNG_PARAMS[family]
        data = sample(family, params, 50_000, rng)
        res = fit_mle(family, data)
        assert res.params[0] == pytest.approx(params[0], rel=0.05)
        assert res.params[1] == pytest.approx(params[1], rel=0.05)

    def test_positive_family_rejects_nonpositive(self):
        with pytest.raises(FitError, match="positive"):
            fit_mle(Family.GAMMA, [1.0, 2.0, 0.0, 3.0, 4.0])

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            fit_mle(Family.GAMMA, [1.0, 2.0])


class TestGof:
    def test_quantile_spaced_data_jump_geometry(self):
        n = 400
        params = (0.2, 0.8)
        probs = (np.arange(1, n + 1) - 0.5) / n
        data = stats.lognorm(params[1], scale=math.exp(params[0])).ppf(probs)
        fit = FitResult(Family.LOGNORMAL, params, 0.0, n, 0.0, True)
        score = gof_lilliefors(fit, data)
        assert score == pytest.approx(math.sqrt(n) / (2 * n), rel=1e-9)

    def test_misspecified_fit_scores_badly(self):
        rng = np.random.default_rng(7)
        data = rng.lognormal(0.0, 1.0, 10_000)
        fit = fit_mle(Family.LAPLACE, data)
        assert gof_lilliefors(fit, data) > 2.0

    def test_correctly_specified_pass_ratio(self):
        rng = np.random.default_rng(8)
        passes = 0
        trials = 200
        for _ in range(trials):
            data = rng.lognormal(0.0, 0.5, 200)
            res = fit_mle(Family.LOGNORMAL, data)
            passes += res.ks_pass
        assert passes / trials >= 0.90

    def test_wrong_family_pass_ratio_low(self):
        rng = np.random.default_rng(9)
        passes = 0
        trials = 100
        for _ in range(trials):
            data = rng.lognormal(0.0, 1.0, 400)
            res = fit_mle(Family.INVGAMMA, data)
            passes += res.ks_pass
        assert passes / trials < 0.6

    def test_exact_cdf_passes_for_large_n(self):
        n = 10_000
        probs = (np.arange(1, n + 1) - 0.5) / n
        data = stats.norm.ppf(probs)
        fit = FitResult(Family.GAUSSIAN, (0.0, 1.0), 0.0, n, 0.0, True)
        assert ks_significance(fit, data)

    def test_kolmogorov_quantile(self):
        assert kolmogorov_quantile(0.05) == pytest.approx(1.358, abs=1e-3)

    def test_best_family_has_lowest_gof_on_own_data(self):
        # local width ~0.9 matches the typical patch scale of the volume data
        rng = np.random.default_rng(10)
        wins = 0
        trials = 50
        for _ in range(trials):
            data = rng.lognormal(0.1, 0.9, 300)
            scores = {}
            for family in VOLUME_FAMILIES:
                scores[family] = fit_mle(family, data).sqrtn_dmax
            wins += min(scores, key=scores.get) == Family.LOGNORMAL
        assert wins / trials >= 0.9


class TestLognormalMoments:
    def test_degenerate_limit(self):
        mu, omega = lognormal_moments(0.0, 1e-8)
        assert mu == pytest.approx(1.0, abs=1e-12)
        assert omega == pytest.approx(0.0, abs=1e-12)

    def test_standard_values(self):
        mu, omega = lognormal_moments(0.0, 1.0)
        assert mu == pytest.approx(math.exp(0.5), rel=1e-12)
        assert omega == pytest.approx((math.e - 1) * math.e, rel=1e-12)

    def test_monte_carlo_round_trip(self):
        rng = np.random.default_rng(11)
        phi, theta = 0.4, 0.7
        draws = rng.lognormal(phi, theta, 1_000_000)
        mu, omega = lognormal_moments(phi, theta)
        assert np.mean(draws) == pytest.approx(mu, rel=0.01)
        assert np.var(draws) == pytest.approx(omega, rel=0.01)

    def test_invalid_theta(self):
        with pytest.raises(ValueError):
            lognormal_moments(0.0, -1.0)


class TestNormalityTests:
    def test_pvalues_uniform_under_null(self):
        rng = np.random.default_rng(12)
        t_ps = []
        jb_ps = []
        for _ in range(200):
            x = rng.normal(0.0, 1.0, 500)
            rep = normality_tests(x)
            t_ps.append(rep.t_test_p)
            jb_ps.append(rep.jarque_bera_p)
        assert stats.kstest(t_ps, "uniform").pvalue > 0.01
        assert stats.kstest(jb_ps, "uniform").pvalue > 0.01

    def test_all_zeros_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            normality_tests(np.zeros(100))

    def test_power_against_shifted_mean(self):
        rng = np.random.default_rng(13)
        rep = normality_tests(rng.normal(0.5, 1.0, 10_000))
        assert rep.t_test_p < 1e-6

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            normality_tests(np.ones(5))
