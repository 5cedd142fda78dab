"""
Tests for the bias formulas, the replication runner and the repeated-sampling studies.
"""

import numpy as np
import pandas as pd
import pytest

from crel.core.exceptions import DomainError, NonSmoothError
from crel.core.models import CoverageCell, CoverageResult, PosteriorConfig
from crel.estimating import psi_from_name, psi_mean, psi_score
from crel.experiments import (
    Outcome,
    asymptotic_efficiency_inv,
    bias_coverage,
    bias_quantile,
    bias_table,
    coverage_simulation,
    expansion_order_study,
    failed_share,
    glm_accuracy_simulation,
    r_term,
    reduce_cells,
    render_text,
    reproduce_table,
    rstar_term,
    run_replications,
    run_study,
    theorem4_cancellation,
    theorem5_variance_study,
    theorem4_statistic,
    to_frame,
    validity_study,
    wilks_calibration,
    write_table,
)
from crel.experiments.variance_study import _cancellation_replication
from crel.model_data import (
    ExponentialMeanModel,
    FlatPrior,
    LaplaceModel,
    NormalModel,
    PoissonRegressionModel,
    generate_exponential,
    generate_laplace,
)

# coverage bias x 100 at eff_inv = 2 for alpha = 0.25, 0.5, 0.75, 0.95, 0.99
TABLE2_MEAN = [-8.878, 0.0, 8.878, 7.027, 2.568]

# Table 1 median coverage bias of the mean, keyed by (gamma, alpha)
TABLE1_MEAN = {(0.0, 0.25): -0.0532, (0.0, 0.75): 0.0864, (-1.0, 0.25): -0.0500, (-1.0, 0.75): 0.0853}


def flaky_task(index, payload):
    if index == payload:
        raise DomainError("bad replication")
    return index * 10


class TestEfficiency:
    @pytest.mark.parametrize("name,expected", [
        ("mean", 2.0),
        ("median", 1.0),
        ("huber", 1.42296),
    ])
    def test_laplace_oracle(self, name, expected):
        assert asymptotic_efficiency_inv(psi_from_name(name), LaplaceModel()) == pytest.approx(
            expected, abs=1e-4)

    def test_tukey_above_bound(self):
        assert asymptotic_efficiency_inv(psi_from_name("tukey"), LaplaceModel()) > 1.0

    def test_ml_score_is_efficient(self):
        eff = asymptotic_efficiency_inv(psi_score(ExponentialMeanModel()), ExponentialMeanModel(), 1.0)
        assert eff == pytest.approx(1.0, abs=1e-6)

    def test_vector_parameter_rejected(self):
        with pytest.raises(DomainError):
            asymptotic_efficiency_inv(psi_mean(), NormalModel(sigma=None))


class TestBiasFormulas:
    @pytest.mark.parametrize("alpha,expected", zip((0.25, 0.5, 0.75, 0.95, 0.99), TABLE2_MEAN))
    def test_coverage_values(self, alpha, expected):
        assert 100.0 * bias_coverage(alpha, 2.0) == pytest.approx(expected, abs=1e-3)

    def test_efficient_has_no_bias(self):
        assert bias_coverage(0.9, 1.0) == 0.0
        assert bias_quantile(0.9, 1.0, 0.1) == 0.0

    def test_quantile_value(self):
        assert bias_quantile(0.975, 4.0, 0.01) == pytest.approx(1.959964 * 0.1, rel=1e-6)

    @pytest.mark.parametrize("alpha,eff_inv", [(0.0, 2.0), (1.0, 2.0), (0.5, 0.9)])
    def test_rejects(self, alpha, eff_inv):
        with pytest.raises(DomainError):
            bias_coverage(alpha, eff_inv)

    def test_var_ml_positive(self):
        with pytest.raises(DomainError):
            bias_quantile(0.5, 2.0, 0.0)

    def test_table(self):
        reports = bias_table([psi_from_name(p) for p in ("mean", "median", "huber")])
        assert len(reports) == 15
        mean_rows = [r for r in reports if r.psi == "mean"]
        assert [round(100 * r.bias_coverage, 3) for r in mean_rows] == pytest.approx(TABLE2_MEAN, abs=1e-3)
        assert all(abs(r.bias_coverage) < 1e-9 for r in reports if r.psi == "median")
        assert all(r.bias_quantile == 0.0 for r in reports)

    def test_table_with_sample_size(self):
        reports = bias_table([psi_mean()], alphas=(0.75,), n=100)
        expected = 0.674490 * 0.1 * (np.sqrt(2.0) - 1.0)
        assert reports[0].bias_quantile == pytest.approx(expected, rel=1e-5)

    def test_render_in_percent(self):
        text = render_text(bias_table([psi_mean()]))
        assert "# units = 1e-2" in text
        assert "8.88" in text


class TestPlugInTerms:
    def test_r_term_for_mean_under_normal(self, normal_sample):
        x = normal_sample.univariate()
        value = r_term(normal_sample, psi_mean(), NormalModel(sigma=1.0), None, 0.975)
        assert value == pytest.approx((np.sqrt(x.var()) - 1.0) * 1.959964, rel=1e-5)

    def test_rstar_term_at_median(self, normal_sample):
        x = normal_sample.univariate()
        e = x - x.mean()
        m2, m3 = np.mean(e ** 2), np.mean(e ** 3)
        value = rstar_term(normal_sample, psi_mean(), NormalModel(sigma=1.0), FlatPrior(), 0.5)
        expected = -(2.0 / 3.0) * m3 / m2 / np.sqrt(x.size)
        assert value == pytest.approx(expected, rel=1e-5, abs=1e-9)

    def test_bad_level(self, normal_sample):
        with pytest.raises(DomainError):
            r_term(normal_sample, psi_mean(), NormalModel(sigma=1.0), None, 1.0)

    def test_theorem4_statistic_closed_form(self):
        # at theta = mean: (2/3) theta^2 (2 / theta^3 - m3 / m2^3)
        data = generate_exponential(100, 1.0, seed=1)
        x = data.univariate()
        e = x - x.mean()
        m2, m3 = np.mean(e ** 2), np.mean(e ** 3)
        expected = (2.0 / 3.0) * x.mean() ** 2 * (2.0 / x.mean() ** 3 - m3 / m2 ** 3)
        assert theorem4_statistic(data, ExponentialMeanModel()) == pytest.approx(expected, rel=1e-4, abs=1e-8)

    def test_theorem4_statistic_scaled(self):
        data = generate_exponential(100, 1.0, seed=1)
        raw = theorem4_statistic(data, ExponentialMeanModel())
        assert theorem4_statistic(data, ExponentialMeanModel(), scaled=True) == pytest.approx(raw / 10.0)

    @pytest.mark.parametrize("n", [200, 201])
    def test_laplace_cancellation_exact(self, n):
        data = generate_laplace(n, 0.5, seed=2)
        assert theorem4_statistic(data, LaplaceModel()) == pytest.approx(0.0, abs=1e-12)

    def test_non_smooth_without_expectations(self):
        class Kinked(LaplaceModel):
            expected_score_derivatives = None

        with pytest.raises(NonSmoothError):
            theorem4_statistic(generate_laplace(50, 0.0, seed=3), Kinked())

    def test_efficiency_needs_univariate_model(self):
        with pytest.raises(DomainError):
            asymptotic_efficiency_inv(psi_mean(), PoissonRegressionModel())


class TestRunner:
    def test_sorted_with_failures(self):
        outcomes = run_replications(flaky_task, [2] * 5, study="unit")
        assert [o.index for o in outcomes] == [0, 1, 2, 3, 4]
        assert not outcomes[2].ok
        assert outcomes[2].error.startswith("DOMAIN")
        assert [o.value for o in outcomes if o.ok] == [0, 10, 30, 40]

    def test_workers_match_sequential(self):
        payloads = [{"seed": 0, "n": 60, "rep": r, "theta": 1.0, "model": "exponential"} for r in range(4)]
        sequential = run_replications(_cancellation_replication, payloads, threads=1)
        parallel = run_replications(_cancellation_replication, payloads, threads=2)
        assert [o.value for o in parallel] == [o.value for o in sequential]


class TestReduce:
    def test_median_and_failures(self):
        outcomes = [
            Outcome(0, {("mean", 0.0, 0.5): 0.1}),
            Outcome(1, {("mean", 0.0, 0.5): 0.3}),
            Outcome(2, {("mean", 0.0, 0.5): None}),
            Outcome(3, error="SAMPLER: failed"),
        ]
        result = reduce_cells("1", "median_coverage_bias", outcomes, ["mean"], [0.0], [0.5],
                              seed=0, M=4, n=10)
        cell = result.cell("mean", 0.0, 0.5)
        assert cell.value == pytest.approx(0.2)
        assert cell.replications == 2 and cell.failures == 2
        assert result.failed_replications == 1

    def test_empty_cell(self):
        outcomes = [Outcome(0, {("mean", 0.0, 0.5): None})]
        result = reduce_cells("1", "s", outcomes, ["mean"], [0.0], [0.5], seed=0, M=1, n=10)
        assert result.cells[0].value is None
        assert failed_share(result) == 1.0


class TestTables:
    @pytest.fixture
    def result(self):
        cells = [
            CoverageCell(psi="mean", gamma=0.0, alpha=0.5, value=0.01, replications=3),
            CoverageCell(psi="mean", gamma=-1.0, alpha=0.5, value=None, replications=0, failures=3),
        ]
        return CoverageResult(table="1", statistic="median_coverage_bias", seed=5, M=3, n=20,
                              gammas=[0.0, -1.0], psis=["mean"], alphas=[0.5], cells=cells)

    def test_frame(self, result):
        frame = to_frame(result)
        assert list(frame["gamma"]) == [0.0, -1.0]
        assert len(frame) == 2

    def test_write(self, result, tmp_path):
        csv_path, txt_path = write_table(result, tmp_path / "tables", "table1")
        frame = pd.read_csv(csv_path)
        assert list(frame["psi"]) == ["mean", "mean"]
        text = txt_path.read_text()
        assert "# seed = 5" in text
        assert "# M = 3" in text

    def test_failed_share(self, result):
        assert failed_share(result) == 0.5


class TestStudies:
    def test_coverage_grid(self):
        result = coverage_simulation(M=2, n=40, gammas=(0.0,), psis=("mean",), alphas=(0.5, 0.95),
                                     seed=1, method="grid")
        assert len(result.cells) == 2
        for cell in result.cells:
            assert cell.replications + cell.failures == 2
            assert cell.value is None or -1.0 < cell.value < 1.0

    def test_coverage_reproducible(self):
        kwargs = dict(M=2, n=40, gammas=(0.0,), psis=("mean",), alphas=(0.75,), seed=3, method="grid")
        a = coverage_simulation(**kwargs)
        b = coverage_simulation(**kwargs)
        assert a.cells[0].value == b.cells[0].value

    def test_validity_grid(self):
        result = validity_study(n=30, M=8, seed=2)
        assert result.study == "validity"
        assert 0.0 <= result.ks <= 1.0
        assert result.failures == 0

    def test_wilks(self):
        results = wilks_calibration(n=50, M=40, seed=4)
        assert [r.gamma for r in results] == [0.0, -1.0]
        assert all(0.0 <= r.ks <= 1.0 for r in results)

    def test_theorem5_rows(self):
        result = theorem5_variance_study(n=30, M=8, gammas=(-1.0, 0.0), seed=5)
        assert [r.gamma for r in result.rows] == [-1.0, 0.0]
        assert all(r.variance > 0.0 for r in result.rows)
        assert result.rows[1].diff_vs_reference == 0.0
        assert result.failures == 0

    def test_theorem4_quantile_term_halves(self):
        result = theorem4_cancellation(n_list=(200, 400), M=200, seed=0)
        term = {(r.term, r.n): r.value for r in result.rows}
        assert 0.35 <= term["quantile_term", 400] / term["quantile_term", 200] <= 0.65
        # the unscaled plug-in only shrinks at the root-n rate
        assert 0.5 < term["plug_in", 400] / term["plug_in", 200] < 1.0
        assert result.slopes["quantile_term"] < result.slopes["plug_in"] < 0.0

    def test_theorem4_laplace_exact(self):
        result = theorem4_cancellation(n_list=(200, 400), M=20, seed=0, model="laplace")
        assert all(r.value == pytest.approx(0.0, abs=1e-12) for r in result.rows)
        assert result.slopes == {}

    def test_theorem4_unknown_model(self):
        with pytest.raises(DomainError):
            theorem4_cancellation(M=1, model="cauchy")

    def test_expansion_orders(self):
        result = expansion_order_study(ns=(100, 400), reps=20, seed=7)
        at_400 = {r.order: r.value for r in result.rows if r.n == 400}
        assert at_400[1] > at_400[3]
        assert set(result.slopes) == {"order_1", "order_2", "order_3"}

    def test_glm_structure(self):
        config = PosteriorConfig(chain_length=400, burn_in=100)
        result = glm_accuracy_simulation(M=2, n=60, gammas=(0.0,), psis=("glm",), alphas=(0.5,),
                                         seed=8, config=config)
        assert {c.parameter for c in result.cells} == {"beta_1", "beta_2"}
        for cell in result.cells:
            assert cell.replications + cell.failures == 2

    def test_glm_reference_checked(self):
        with pytest.raises(DomainError):
            glm_accuracy_simulation(M=1, reference="bogus")

    def test_unknown_table(self):
        with pytest.raises(DomainError):
            run_study("9")

    def test_unknown_scale(self):
        with pytest.raises(DomainError):
            run_study("2", scale="huge")

    def test_reproduce_table2(self, tmp_path):
        result, paths, share = reproduce_table("2", out=tmp_path)
        assert [p.name for p in paths] == ["table2.csv", "table2.txt"]
        assert share == 0.0
        frame = pd.read_csv(paths[0])
        assert set(frame["psi"]) == {"mean", "median", "huber(1.345)", "tukey(4.685)"}

    @pytest.mark.slow
    def test_table1_desk_pattern(self, tmp_path):
        result, _, share = reproduce_table("1", scale="desk", seed=0, threads=4, out=tmp_path)
        assert share <= 0.10
        for gamma in (0.0, -1.0):
            assert result.cell("mean", gamma, 0.25).value < 0.0
            for alpha in (0.75, 0.95, 0.99):
                assert result.cell("mean", gamma, alpha).value > 0.0
            for alpha in (0.25, 0.75):
                value = result.cell("mean", gamma, alpha).value
                expected = TABLE1_MEAN[gamma, alpha]
                assert 0.5 <= value / expected <= 2.0
        assert abs(result.cell("median", 0.0, 0.95).value) < abs(result.cell("mean", 0.0, 0.95).value)

    @pytest.mark.slow
    def test_table3_robust_beats_classical(self, tmp_path):
        result, _, share = reproduce_table("3", scale="desk", seed=0, threads=4, out=tmp_path)
        assert result.M == 40
        assert share <= 0.10
        for parameter in ("beta_1", "beta_2"):
            for gamma in result.gammas:
                for alpha in result.alphas:
                    robust = result.cell("glm_robust:1.6", gamma, alpha, parameter).value
                    classical = result.cell("glm", gamma, alpha, parameter).value
                    assert robust < classical

    @pytest.mark.slow
    def test_wilks_chi_square(self):
        results = wilks_calibration(n=200, M=2000, gammas=(0.0, -1.0), seed=0, threads=4)
        for r in results:
            assert r.failures == 0
            assert r.ks < 0.05

    @pytest.mark.slow
    def test_validity_uniform(self):
        result = validity_study(n=110, M=500, gamma=0.0, seed=0, psi="mean", threads=4)
        assert result.failures == 0
        assert result.ks < 0.07

    @pytest.mark.slow
    def test_expansion_order_slopes(self):
        result = expansion_order_study(ns=(50, 100, 200, 400, 800), reps=200, seed=0, threads=4)
        assert result.slopes["order_1"] <= -0.35
        assert result.slopes["order_2"] < result.slopes["order_1"]

    @pytest.mark.slow
    def test_theorem5_ordering(self):
        result = theorem5_variance_study(n=30, M=500, alpha=0.9, seed=0, threads=4)
        variances = {r.gamma: r.variance for r in result.rows}
        assert min(variances, key=variances.get) == 0.0
        assert max(variances, key=variances.get) == -2.0
        worst = next(r for r in result.rows if r.gamma == -2.0)
        assert worst.diff_vs_reference > 2.0 * worst.se_diff
