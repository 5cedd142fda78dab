"""
Tests for estimating functions, the GLM scores and M-estimation.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from crel.core.exceptions import DomainError, NonSmoothError, SchemaError
from crel.core.models import ContaminationConfig
from crel.core.numdiff import central_diff
from crel.estimating import (
    poisson_expected_huber,
    psi_from_name,
    psi_glm,
    psi_glm_robust,
    psi_huber,
    psi_mean,
    psi_median,
    psi_score,
    psi_tukey,
    solve_m_estimate,
    unbiasedness_check,
)
from crel.model_data import (
    Dataset,
    ExponentialMeanModel,
    LaplaceModel,
    generate_contaminated_poisson,
    generate_exponential,
)


class TestLocationFamilies:
    def test_mean_values(self, three_points):
        assert_allclose(psi_mean().evaluate(three_points, 0.5), [[-1.5], [-0.5], [1.5]])

    def test_mean_root(self, normal_sample):
        est = solve_m_estimate(psi_mean(), normal_sample, 0.0)
        assert est.theta_hat[0] == pytest.approx(normal_sample.obs.mean())
        assert est.residual_norm < 1e-9

    def test_median_two_valued(self, three_points):
        values = psi_median().evaluate(three_points, 0.0)
        assert_allclose(values[:, 0], [0.5, 0.5, -0.5])

    def test_median_not_differentiable(self, three_points):
        with pytest.raises(NonSmoothError):
            psi_median().jacobian(three_points, 0.0)

    def test_huber_equals_mean_without_clipping(self):
        data = Dataset(obs=[-0.6, -0.2, 0.1, 0.3, 0.9])
        est = solve_m_estimate(psi_huber(1.345), data, 0.0)
        assert est.theta_hat[0] == pytest.approx(data.obs.mean(), abs=1e-9)

    def test_huber_clips(self):
        data = Dataset(obs=[-10.0, 0.0, 10.0])
        assert_allclose(psi_huber(1.0).evaluate(data, 0.0)[:, 0], [-1.0, 0.0, 1.0])

    def test_huber_constant_positive(self):
        with pytest.raises(DomainError):
            psi_huber(0.0)

    def test_tukey_jacobian_matches_differences(self, normal_sample):
        psi = psi_tukey(4.685)
        theta = np.array([1.1])
        numeric = central_diff(lambda t: psi.evaluate(normal_sample, t), theta)
        assert_allclose(psi.jacobian(normal_sample, theta), numeric, rtol=1e-5, atol=1e-8)

    def test_tukey_hessian_matches_differences(self, normal_sample):
        psi = psi_tukey(4.685)
        theta = np.array([1.1])
        numeric = central_diff(lambda t: psi.jacobian(normal_sample, t), theta)
        assert_allclose(psi.hessian(normal_sample, theta), numeric, rtol=1e-4, atol=1e-6)

    def test_tukey_redescends(self):
        data = Dataset(obs=[-20.0, 20.0])
        assert_allclose(psi_tukey(4.685).evaluate(data, 0.0), 0.0)

    def test_wrong_theta_length(self, three_points):
        with pytest.raises(DomainError):
            psi_mean().evaluate(three_points, [0.0, 1.0])

    def test_scaled(self, three_points):
        psi = psi_mean().scaled([[2.0]])
        assert_allclose(psi.evaluate(three_points, 0.0)[:, 0], [-2.0, 0.0, 4.0])
        assert_allclose(psi.jacobian(three_points, 0.0), -2.0)


class TestScore:
    def test_exponential_score_root_is_mean(self):
        data = generate_exponential(50, 2.0, seed=2)
        est = solve_m_estimate(psi_score(ExponentialMeanModel()), data, 1.0)
        assert est.theta_hat[0] == pytest.approx(data.obs.mean())

    def test_laplace_score_is_non_smooth(self, laplace_sample):
        psi = psi_score(LaplaceModel())
        assert not psi.smooth
        with pytest.raises(NonSmoothError):
            psi.jacobian(laplace_sample, 0.0)


class TestGLM:
    def test_glm_jacobian_matches_differences(self, poisson_sample):
        psi = psi_glm().bind(poisson_sample)
        beta = np.array([0.4, 0.2, -0.1])
        numeric = central_diff(lambda b: psi.evaluate(poisson_sample, b), beta)
        assert_allclose(psi.jacobian(poisson_sample, beta), numeric, rtol=1e-5, atol=1e-7)

    def test_glm_hessian_matches_differences(self, poisson_sample):
        psi = psi_glm().bind(poisson_sample)
        beta = np.array([0.4, 0.2, -0.1])
        numeric = central_diff(lambda b: psi.jacobian(poisson_sample, b), beta)
        assert_allclose(psi.hessian(poisson_sample, beta), numeric, rtol=1e-5, atol=1e-7)

    def test_bind_sets_dimension(self, poisson_sample):
        assert psi_glm().bind(poisson_sample).dim_theta == 3

    def test_glm_needs_design(self, three_points):
        with pytest.raises(SchemaError):
            psi_glm().bind(three_points)

    def test_unsupported_family(self):
        with pytest.raises(DomainError):
            psi_glm("logit", "binomial")

    @pytest.mark.parametrize("mu", [0.3, 1.0, 2.7, 15.0, 60.0])
    @pytest.mark.parametrize("c", [0.5, 1.6, 3.0])
    def test_expected_huber_closed_matches_sum(self, mu, c):
        closed = poisson_expected_huber(np.array([mu]), c, method="closed")
        direct = poisson_expected_huber(np.array([mu]), c, method="sum")
        # the direct sum drops the tail beyond mu + 10 sqrt(mu)
        assert_allclose(closed, direct, atol=1e-6)

    def test_expected_huber_bad_method(self):
        with pytest.raises(DomainError):
            poisson_expected_huber(np.array([1.0]), 1.6, method="mc")

    def test_robust_without_clipping_is_classical(self, poisson_sample):
        beta = np.array([0.4, 0.2, -0.1])
        classical = psi_glm().bind(poisson_sample).evaluate(poisson_sample, beta)
        robust = psi_glm_robust(1e6).bind(poisson_sample).evaluate(poisson_sample, beta)
        assert_allclose(robust, classical, atol=1e-8)

    def test_glm_root_is_poisson_mle(self, poisson_sample):
        from crel.model_data import PoissonRegressionModel

        est = solve_m_estimate(psi_glm(), poisson_sample, np.zeros(3))
        mle = PoissonRegressionModel(3).fit_ml(poisson_sample)
        assert_allclose(est.theta_hat, mle, atol=1e-6)

    def test_robust_root_exists(self, poisson_sample):
        est = solve_m_estimate(psi_glm_robust(1.6), poisson_sample, np.zeros(3))
        assert np.all(np.isfinite(est.theta_hat))


class TestRegistry:
    @pytest.mark.parametrize("name,label", [
        ("mean", "mean"),
        ("median", "median"),
        ("huber", "huber(1.345)"),
        ("huber:2", "huber(2)"),
        ("tukey:3.5", "tukey(3.5)"),
        ("glm", "glm(log,poisson)"),
        ("glm_robust:1.6", "glm_robust(1.6)"),
        ("score:exponential", "score(exponential)"),
    ])
    def test_names(self, name, label):
        assert psi_from_name(name).label == label

    def test_tuning_overrides(self):
        assert psi_from_name("huber:2", tuning=1.0).tuning == 1.0

    @pytest.mark.parametrize("name", ["trimmed", "huber:abc", "score:cauchy"])
    def test_unknown(self, name):
        with pytest.raises(DomainError):
            psi_from_name(name)


class TestUnbiasedness:
    @staticmethod
    def draw(n, rng):
        return Dataset(obs=rng.normal(1.0, 1.0, size=n))

    def test_unbiased_at_truth(self):
        mean, sd, ok = unbiasedness_check(psi_mean(), self.draw, 1.0, draws=20000, seed=4)
        assert ok
        assert sd[0] == pytest.approx(1.0, rel=0.05)

    def test_biased_off_truth(self):
        _, _, ok = unbiasedness_check(psi_mean(), self.draw, 1.5, draws=20000, seed=4)
        assert not ok

    def test_robust_glm_unbiased_at_truth(self):
        beta = np.array([0.5, 0.3, -0.2])
        clean = ContaminationConfig(clean_fraction=1.0)

        def draw(n, rng):
            return generate_contaminated_poisson(n, beta, clean, rng)

        mean, sd, _ = unbiasedness_check(psi_glm_robust(1.6), draw, beta, draws=20000, seed=6)
        assert np.all(np.abs(mean) <= 4.5 * sd / np.sqrt(20000))
        _, _, ok = unbiasedness_check(psi_glm_robust(1.6), draw, beta + 0.3, draws=20000, seed=6)
        assert not ok
