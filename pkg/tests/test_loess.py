import numpy as np
import pytest
from sklearn.base import clone

from patchmix.loess import (
    LoessConfig,
    LoessRegression,
    evaluate,
    loess_fit,
    tricube,
)


class TestTricube:
    def test_spot_values(self):
        assert tricube(0.0) == 1.0
        assert tricube(1.0) == 0.0
        assert tricube(-1.0) == 0.0
        assert tricube(0.5) == pytest.approx(0.669921875, abs=1e-15)
        assert tricube(2.0) == 0.0

    def test_vectorized(self):
        u = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
        w = tricube(u)
        assert w[0] == w[4] == 0.0
        assert w[1] == w[3]
        assert w[2] == 1.0


class TestLoessFit:
    @pytest.mark.parametrize("fraction", [0.1, 0.3, 0.6, 1.0])
    def test_exact_on_affine_data(self, fraction):
        rng = np.random.default_rng(0)
        x = np.sort(rng.uniform(-5, 5, 80))
        y = 2.0 * x + 1.0
        curve = loess_fit(x, y, LoessConfig(fraction=fraction))
        np.testing.assert_allclose(curve.y_hat, y, atol=1e-10)
        np.testing.assert_allclose(curve.robustness_weights, 1.0)

    def test_constant_data(self):
        x = np.linspace(0, 1, 30)
        curve = loess_fit(x, np.full(30, 3.5), LoessConfig(fraction=0.5))
        np.testing.assert_allclose(curve.y_hat, 3.5, atol=1e-12)

    def test_robustness_tames_outlier(self):
        rng = np.random.default_rng(1)
        x = np.sort(rng.uniform(0, 10, 100))
        y = 1.5 * x + 2.0 + rng.normal(0, 0.05, 100)
        k = 50
        y_out = y.copy()
        y_out[k] += 30.0  # single gross outlier
        robust = loess_fit(x, y_out, LoessConfig(fraction=0.3))
        plain = loess_fit(x, y_out, LoessConfig(fraction=0.3, max_robust_iters=0))
        truth = 1.5 * x[k] + 2.0
        robust_val = robust.evaluate(x[k])
        plain_val = plain.evaluate(x[k])
        assert abs(robust_val - truth) / truth < 0.02
        assert abs(plain_val - truth) > abs(robust_val - truth)
        # the outlier's residual exceeds 6s, so its weight is driven to zero
        idx = int(np.searchsorted(robust.x, x[k]))
        assert robust.robustness_weights[idx] == 0.0

    def test_weights_in_unit_interval(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, 60)
        y = np.sin(6 * x) + rng.standard_t(2, 60) * 0.2
        curve = loess_fit(x, y, LoessConfig(fraction=0.4))
        assert np.all(curve.robustness_weights >= 0.0)
        assert np.all(curve.robustness_weights <= 1.0)
        s = np.median(np.abs(curve.residuals))
        big = np.abs(curve.residuals) >= 6 * s
        assert np.all(curve.robustness_weights[big] == 0.0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 5, 50)
        y = x**1.5 + rng.normal(0, 0.1, 50)
        curve_a = loess_fit(x, y, LoessConfig(fraction=0.5))
        perm = rng.permutation(50)
        curve_b = loess_fit(x[perm], y[perm], LoessConfig(fraction=0.5))
        np.testing.assert_array_equal(curve_a.x, curve_b.x)
        np.testing.assert_array_equal(curve_a.y_hat, curve_b.y_hat)

    def test_iteration_cap_never_binds_on_smooth_corpus(self):
        rng = np.random.default_rng(4)
        x = np.sort(rng.uniform(0, 10, 120))
        y = np.cos(x) + rng.normal(0, 0.2, 120)
        capped = loess_fit(x, y, LoessConfig(fraction=0.4, max_robust_iters=10))
        loose = loess_fit(x, y, LoessConfig(fraction=0.4, max_robust_iters=40))
        np.testing.assert_array_equal(capped.y_hat, loose.y_hat)

    def test_duplicate_x_beyond_neighbor_count(self):
        x = np.concatenate([np.zeros(40), np.ones(10)])
        y = np.concatenate([np.full(40, 2.0), np.full(10, 5.0)])
        curve = loess_fit(x, y, LoessConfig(fraction=0.2))  # r=10 < 40 duplicates
        np.testing.assert_allclose(curve.evaluate(0.0), 2.0, atol=1e-12)
        np.testing.assert_allclose(curve.evaluate(1.0), 5.0, atol=1e-12)

    def test_degenerate_x_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            loess_fit(np.ones(10), np.arange(10.0), LoessConfig())

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            loess_fit([1.0, 2.0], [1.0, 2.0], LoessConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LoessConfig(fraction=0.0)
        with pytest.raises(ValueError):
            LoessConfig(fraction=1.5)
        with pytest.raises(ValueError):
            LoessConfig(max_robust_iters=-1)


class TestEvaluate:
    def setup_method(self):
        x = np.array([0.0, 1.0, 2.0, 4.0])
        y = np.array([0.0, 2.0, 1.0, 5.0])
        self.curve = loess_fit(x, y, LoessConfig(fraction=1.0, max_robust_iters=0))

    def test_at_fitted_point(self):
        for xi, yi in zip(self.curve.x, self.curve.y_hat):
            assert evaluate(self.curve, xi) == yi

    def test_midpoint_is_mean(self):
        mid = 0.5 * (self.curve.x[1] + self.curve.x[2])
        expected = 0.5 * (self.curve.y_hat[1] + self.curve.y_hat[2])
        assert evaluate(self.curve, mid) == pytest.approx(expected, rel=1e-12)

    def test_constant_extrapolation(self):
        assert evaluate(self.curve, 100.0) == self.curve.y_hat[-1]
        assert evaluate(self.curve, -100.0) == self.curve.y_hat[0]


class TestEstimator:
    def test_fit_predict_r2(self):
        rng = np.random.default_rng(5)
        x = np.sort(rng.uniform(0, 1, 60))
        y = 3.0 * x - 1.0
        est = LoessRegression(fraction=0.4)
        est.fit(x, y)
        assert est.score(x, y) == pytest.approx(1.0, abs=1e-12)
        assert est.predict([0.5])[0] == pytest.approx(0.5, abs=1e-10)

    def test_get_params_and_clone(self):
        est = LoessRegression(fraction=0.25, max_robust_iters=3)
        params = est.get_params()
        assert params["fraction"] == 0.25
        assert clone(est).get_params() == params
