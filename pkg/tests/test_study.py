import numpy as np
import pytest
from numpy.testing import assert_allclose

from copula_app.copulas import GaussianCopula, GumbelCopula, TailCurve, TwoComponentCopula
from copula_app.copulas.gaussian import GaussianParams, gauss_sample
from copula_app.copulas.two_component import TwoComponentParams, fit_margin_gpds, tc_sample
from copula_app.empirical import LossSample, kendall_tau
from copula_app.errors import DomainError
from copula_app.gof import bh_threshold
from copula_app.rng import derive_seed, stream
from copula_app.study import (
    DEFAULT_FAMILIES,
    analyse_sample,
    draw_model_params,
    family_configs,
    headline_fit,
    run_study,
)


class TestFamilyConfigs:
    def test_seeds_per_family(self):
        configs = family_configs(["gaussian", "gumbel"], seed=7, bootstrap_k=10, threads=2)
        assert [c.copula_family for c in configs] == ["gaussian", "gumbel"]
        assert [c.seed for c in configs] == [derive_seed(7, 1), derive_seed(7, 2)]
        assert all(c.bootstrap_k == 10 and c.threads == 2 for c in configs)


class TestHeadlineFit:
    def test_families(self, reference_sample):
        assert isinstance(headline_fit("gaussian", reference_sample, 0.5), GaussianCopula)
        assert isinstance(headline_fit("gumbel", reference_sample, 0.5), GumbelCopula)
        assert isinstance(headline_fit("two-component", reference_sample, 0.5), TwoComponentCopula)
        with pytest.raises(ValueError):
            headline_fit("clayton", reference_sample, 0.5)

    def test_reuses_margin_fits(self, reference_sample):
        fits = fit_margin_gpds(reference_sample)
        fitted = headline_fit("two-component", reference_sample, 0.5, fits)
        assert fitted.p == TwoComponentParams(alpha1=1.0 / fits[0].params.xi, alpha2=1.0 / fits[1].params.xi)
        assert fitted.p == headline_fit("two-component", reference_sample, 0.5).p


class TestRunStudy:
    def test_too_small(self, reference_model):
        with pytest.raises(DomainError):
            run_study(reference_model, 49, family_configs(["gaussian"], seed=1, bootstrap_k=2))

    def test_small_run(self, reference_model):
        configs = family_configs(["gaussian", "gumbel", "two-component"], seed=3, bootstrap_k=3)
        sample, report = run_study(reference_model, 200, configs, seed=3)
        assert sample.n == 200
        assert report.seed == 3
        assert report.model == reference_model
        assert [r.family for r in report.results] == ["gaussian", "gumbel", "two-component"]
        assert report.margin_fits is not None
        for result in report.results:
            if result.completed:
                assert result.gof.valid_iterations + result.gof.skipped_iterations == 3
        assert report.bh.m == len(report.gof_reports)
        assert report.bh_threshold == pytest.approx(0.05 / sum(1.0 / j for j in range(1, report.bh.m + 1)))
        estimates = dict(report.lambda_u_estimates)
        assert estimates["gaussian"] == 0.0
        if "two-component" in estimates:
            assert isinstance(estimates["two-component"], TailCurve)

    def test_deterministic(self, reference_model):
        configs = family_configs(["gaussian"], seed=5, bootstrap_k=4)
        sample_a, report_a = run_study(reference_model, 100, configs, seed=5)
        sample_b, report_b = run_study(reference_model, 100, configs, seed=5)
        assert np.array_equal(sample_a.data, sample_b.data)
        assert report_a.tau_hat == report_b.tau_hat
        assert report_a.gof_reports[0].p_value == report_b.gof_reports[0].p_value

    def test_external_p_value_joins_correction(self, reference_model):
        configs = family_configs(["gaussian", "gumbel", "two-component"], seed=8, bootstrap_k=2)
        _, report = run_study(reference_model, 100, configs, seed=8, external_p_values={"extreme-value": 0.5})
        assert report.external_p_values == {"extreme-value": 0.5}
        assert ("extreme-value", False) in report.bh_decisions
        assert report.bh.m == len(report.gof_reports) + 1
        if report.bh.m == 4:
            assert report.bh_threshold == pytest.approx(0.024, abs=1e-9)


class TestAnalyseSample:
    def test_negative_dependence_invalidates_gumbel(self):
        sample = LossSample(gauss_sample(GaussianParams(-0.6), 200, stream(51)))
        report = analyse_sample(sample, family_configs(["gaussian", "gumbel"], seed=2, bootstrap_k=3))
        assert report.tau_hat < 0
        gumbel = report.result("gumbel")
        assert gumbel.fitted is None
        assert "tau_hat < 0" in gumbel.fit_error
        assert "tau_hat < 0" in gumbel.gof_error
        assert not gumbel.completed
        assert report.result("gaussian").completed
        assert report.bh.m == 1
        assert [name for name, _ in report.bh_decisions] == ["gaussian"]

    def test_unknown_family_lookup(self, reference_sample):
        report = analyse_sample(reference_sample, family_configs(["gaussian"], seed=1, bootstrap_k=1))
        with pytest.raises(KeyError):
            report.result("gumbel")


class TestDrawModelParams:
    def test_alphas_at_least_one(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            m = draw_model_params(rng)
            assert m.tc.alpha1 >= 1.0 and m.tc.alpha2 >= 1.0
            assert (m.sigma1, m.sigma2) == (1.0, 0.9)


@pytest.mark.slow
class TestReferenceStudy:
    def test_fitted_parameter_medians(self, reference_model):
        r12, theta, alphas = [], [], []
        for rep in range(20):
            sample = tc_sample(reference_model, 1000, stream(9000 + rep, 0))
            tau_hat = kendall_tau(sample)
            r12.append(headline_fit("gaussian", sample, tau_hat).params["r12"])
            theta.append(headline_fit("gumbel", sample, tau_hat).params["theta"])
            fitted = headline_fit("two-component", sample, tau_hat).params
            alphas.append([fitted["alpha1"], fitted["alpha2"]])
        assert np.median(r12) == pytest.approx(0.645, abs=0.05)
        assert np.median(theta) == pytest.approx(1.81, abs=0.15)
        assert_allclose(np.median(alphas, axis=0), [3.387732, 1.181292], atol=0.6)

    def test_gof_decisions(self, reference_model):
        threshold = bh_threshold(3, 0.05)
        rejected = {"gaussian": 0, "gumbel": 0}
        accepted = 0
        for rep in range(20):
            configs = family_configs(DEFAULT_FAMILIES, seed=500 + rep, bootstrap_k=200, threads=4)
            _, report = run_study(reference_model, 1000, configs, seed=500 + rep)
            for family in rejected:
                result = report.result(family)
                rejected[family] += result.completed and result.gof.p_value < threshold
            tc = report.result("two-component")
            accepted += tc.completed and tc.gof.p_value > 0.05
        assert rejected["gaussian"] >= 18
        assert rejected["gumbel"] >= 18
        assert accepted >= 17
