"""
Tests for datasets, generators, parametric models and priors.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from crel.core.exceptions import DomainError, SchemaError
from crel.core.models import ContaminationConfig
from crel.core.numdiff import central_diff
from crel.core.streams import derive_rng, derive_seed, resolve_seed
from crel.model_data import (
    Dataset,
    ExponentialFamily,
    ExponentialMeanModel,
    FlatPrior,
    LaplaceModel,
    NormalFamily,
    NormalModel,
    NormalPrior,
    PoissonRegressionModel,
    UnivariateModel,
    ecdf,
    generate_contaminated_poisson,
    generate_design,
    generate_exponential,
    generate_laplace,
    load_dataset,
    parse_prior,
    save_dataset,
)


class TestDataset:
    def test_vector_becomes_column(self):
        data = Dataset(obs=[1.0, 2.0, 3.0])
        assert data.obs.shape == (3, 1)
        assert data.n == 3 and data.p == 1

    def test_empty_rejected(self):
        with pytest.raises(SchemaError):
            Dataset(obs=np.empty((0, 1)))

    def test_nan_rejected(self):
        with pytest.raises(SchemaError):
            Dataset(obs=[1.0, np.nan])

    def test_response_needs_design(self):
        with pytest.raises(SchemaError):
            Dataset(obs=[[1.0], [2.0]], response=[1.0, 2.0])

    def test_read_only(self):
        data = Dataset(obs=[1.0, 2.0])
        with pytest.raises(ValueError):
            data.obs[0, 0] = 5.0

    def test_glm_layout(self):
        X = np.column_stack([np.ones(4), np.arange(4.0)])
        data = Dataset.from_glm([0, 1, 2, 3], X)
        assert data.is_glm
        assert data.obs.shape == (4, 3)
        assert_allclose(data.obs[:, 0], [0, 1, 2, 3])

    def test_univariate_rejects_matrix(self):
        with pytest.raises(SchemaError):
            Dataset(obs=np.ones((3, 2))).univariate()

    def test_take_keeps_glm_columns(self, poisson_sample):
        sub = poisson_sample.take([0, 2, 4])
        assert sub.n == 3
        assert sub.is_glm
        assert_allclose(sub.response, poisson_sample.response[[0, 2, 4]])


class TestEcdf:
    def test_right_continuous(self):
        data = Dataset(obs=[1.0, 2.0, 3.0])
        assert ecdf(data, 2.0) == pytest.approx(2.0 / 3.0)
        assert ecdf(data, 0.5) == 0.0
        assert ecdf(data, 3.0) == 1.0


class TestCsv:
    def test_univariate_file(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("x\n-1\n0\n2\n")
        data = load_dataset(path)
        assert not data.is_glm
        assert_allclose(data.univariate(), [-1.0, 0.0, 2.0])

    def test_glm_file(self, tmp_path, poisson_sample):
        path = tmp_path / "glm.csv"
        save_dataset(poisson_sample, path)
        data = load_dataset(path)
        assert data.is_glm
        assert data.design.shape == (80, 3)
        assert_allclose(data.response, poisson_sample.response)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x\n1\nabc\n")
        with pytest.raises(SchemaError):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_dataset(tmp_path / "nope.csv")


class TestGenerators:
    def test_same_seed_same_data(self):
        a = generate_laplace(50, 1.0, seed=11)
        b = generate_laplace(50, 1.0, seed=11)
        assert_allclose(a.obs, b.obs)

    def test_different_seed(self):
        a = generate_laplace(50, 1.0, seed=11)
        b = generate_laplace(50, 1.0, seed=12)
        assert not np.allclose(a.obs, b.obs)

    def test_bad_n(self):
        with pytest.raises(DomainError):
            generate_laplace(0, 0.0, seed=1)

    def test_laplace_centered_at_theta(self):
        data = generate_laplace(100_000, 0.7, seed=21)
        assert np.median(data.univariate()) == pytest.approx(0.7, abs=0.02)
        assert LaplaceModel().fit_ml(data)[0] == pytest.approx(0.7, abs=0.02)

    def test_outlier_share(self):
        beta = [0.5, 0.3, -0.2]
        dirty = generate_contaminated_poisson(10_000, beta, ContaminationConfig(), seed=22)
        clean = generate_contaminated_poisson(
            10_000, beta, ContaminationConfig(clean_fraction=1.0), seed=22)
        share = np.mean(dirty.response != clean.response)
        assert share == pytest.approx(0.1, abs=0.01)

    def test_exponential_mean_positive(self):
        with pytest.raises(DomainError):
            generate_exponential(10, -1.0, seed=1)

    def test_design_standardized(self):
        X = generate_design(500, seed=4)
        assert_allclose(X[:, 0], 1.0)
        assert_allclose(X[:, 1:].mean(axis=0), 0.0, atol=1e-12)
        assert_allclose(X[:, 1:].std(axis=0), 1.0, atol=1e-12)

    def test_clean_fraction_one_reproduces_clean_responses(self):
        beta = [0.5, 0.3, -0.2]
        dirty = generate_contaminated_poisson(300, beta, ContaminationConfig(), seed=9)
        clean = generate_contaminated_poisson(
            300, beta, ContaminationConfig(clean_fraction=1.0), seed=9)
        assert_allclose(dirty.design, clean.design)
        changed = dirty.response != clean.response
        assert changed.any()
        assert set(np.unique(dirty.response[changed])) <= {42.0, 43.0}

    def test_design_shape_checked(self):
        with pytest.raises(DomainError):
            generate_contaminated_poisson(10, [0.1, 0.2], None, seed=1, design=np.ones((10, 3)))


class TestParametricModels:
    def test_laplace_fit_is_median(self, laplace_sample):
        model = LaplaceModel()
        assert model.fit_ml(laplace_sample)[0] == pytest.approx(np.median(laplace_sample.obs))
        assert_allclose(model.info2(laplace_sample, 0.0), [[1.0]])

    def test_laplace_log_density(self):
        data = Dataset(obs=[0.3, -1.2])
        expected = stats.laplace.logpdf([0.3, -1.2], loc=0.1)
        assert_allclose(LaplaceModel().log_density(data, 0.1), expected)

    def test_normal_two_parameter_jacobian(self, normal_sample):
        model = NormalModel(sigma=None)
        theta = np.array([0.8, 1.7])
        numeric = central_diff(lambda t: model.score(normal_sample, t), theta)
        assert_allclose(model.score_jacobian(normal_sample, theta), numeric, rtol=1e-5, atol=1e-7)

    def test_normal_two_parameter_hessian(self, normal_sample):
        model = NormalModel(sigma=None)
        theta = np.array([0.8, 1.7])
        numeric = central_diff(lambda t: model.score_jacobian(normal_sample, t), theta)
        assert_allclose(model.score_hessian(normal_sample, theta), numeric, rtol=1e-5, atol=1e-6)

    def test_normal_sigma_positive(self, normal_sample):
        with pytest.raises(DomainError):
            NormalModel(sigma=None).score(normal_sample, [0.0, -1.0])

    def test_exponential_derivatives(self):
        data = generate_exponential(40, 2.0, seed=5)
        model = ExponentialMeanModel()
        theta = np.array([1.8])
        numeric = central_diff(lambda t: model.score(data, t), theta)
        assert_allclose(model.score_jacobian(data, theta), numeric, rtol=1e-6, atol=1e-8)
        numeric3 = central_diff(lambda t: model.score_jacobian(data, t), theta)
        assert_allclose(model.score_hessian(data, theta), numeric3, rtol=1e-5, atol=1e-6)
        assert model.fit_ml(data)[0] == pytest.approx(data.obs.mean())

    def test_exponential_info2_at_mle(self):
        data = generate_exponential(40, 2.0, seed=5)
        model = ExponentialMeanModel()
        t = model.fit_ml(data)
        assert model.info2(data, t)[0, 0] == pytest.approx(1.0 / t[0] ** 2)

    def test_poisson_regression_score_zero_at_fit(self, poisson_sample):
        model = PoissonRegressionModel(3)
        beta = model.fit_ml(poisson_sample)
        assert_allclose(model.score(poisson_sample, beta).sum(axis=0), 0.0, atol=1e-6)

    def test_poisson_regression_needs_glm(self):
        with pytest.raises(SchemaError):
            PoissonRegressionModel(1).score(Dataset(obs=[1.0, 2.0]), [0.0])

    def test_only_univariate_models_carry_information(self):
        for model in (LaplaceModel(), NormalModel(), ExponentialMeanModel()):
            assert isinstance(model, UnivariateModel)
            assert model.fisher_information(1.0).shape == (1, 1)
        assert not isinstance(PoissonRegressionModel(3), UnivariateModel)
        assert not hasattr(PoissonRegressionModel(3), "fisher_information")


class TestPriors:
    def test_normal_prior_matches_scipy(self):
        prior = NormalPrior(1.0, 2.0)
        assert prior.xi(0.3) == pytest.approx(stats.norm.logpdf(0.3, 1.0, 2.0))
        assert prior.grad_xi(0.3)[0] == pytest.approx(-(0.3 - 1.0) / 4.0)
        assert_allclose(prior.hess_xi(0.3), [[-0.25]])

    def test_flat_prior(self):
        prior = FlatPrior(2)
        assert prior.xi([1.0, 2.0]) == 0.0
        assert_allclose(prior.hess_xi([1.0, 2.0]), np.zeros((2, 2)))

    def test_parse_normal(self):
        prior = parse_prior("normal:0.5,2", dim=3)
        assert isinstance(prior, NormalPrior)
        assert_allclose(prior.mean, [0.5, 0.5, 0.5])
        assert_allclose(prior.sd, [2.0, 2.0, 2.0])

    def test_parse_flat(self):
        assert isinstance(parse_prior("flat"), FlatPrior)

    @pytest.mark.parametrize("spec", ["beta:1,2", "normal:1", "normal:a,b", "normal:0,-1"])
    def test_parse_rejects(self, spec):
        with pytest.raises(DomainError):
            parse_prior(spec)


class TestExponentialFamilies:
    @pytest.mark.parametrize("family", [ExponentialFamily(), NormalFamily()])
    def test_mean_natural_inverse(self, family):
        for theta in (0.5, 1.0, 3.0):
            assert family.mean_param(family.natural_param(theta)) == pytest.approx(theta)

    def test_exponential_natural_score_is_mean_score(self):
        family = ExponentialFamily()
        y = np.array([0.5, 2.0])
        assert_allclose(family.natural_score(y, family.natural_param(1.5)), y - 1.5)

    def test_exponential_domain(self):
        with pytest.raises(DomainError):
            ExponentialFamily().natural_param(0.0)


class TestStreams:
    def test_streams_reproducible(self):
        a = derive_rng(3, 1, 2).normal(size=5)
        b = derive_rng(3, 1, 2).normal(size=5)
        assert_allclose(a, b)

    def test_streams_distinct(self):
        a = derive_rng(3, 1, 2).normal(size=5)
        b = derive_rng(3, 2, 1).normal(size=5)
        assert not np.allclose(a, b)

    def test_derive_seed_stable(self):
        assert derive_seed(5, 1) == derive_seed(5, 1)
        assert derive_seed(5, 1) != derive_seed(5, 2)

    def test_resolve_seed_explicit(self):
        assert resolve_seed(17) == 17

    def test_resolve_seed_env(self, monkeypatch):
        monkeypatch.setattr("crel.core.streams.settings.SEED", 99)
        assert resolve_seed(None) == 99
