import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from copula_app.copulas import TwoComponentCopula
from copula_app.copulas.two_component import (
    FIT_ALPHA_MAX,
    ModelParams,
    TwoComponentParams,
    default_tail_grid,
    laguerre_is_reliable,
    tail_verdict,
    tc_cdf,
    tc_density,
    tc_fit_margins,
    tc_fit_pseudo_likelihood,
    tc_joint_survival,
    tc_lambda_u_curve,
    tc_log_density,
    tc_sample,
    tc_sample_uniform,
)
from copula_app.distributions import pareto2_cdf
from copula_app.empirical import LossSample, PseudoSample, empirical_copula, kendall_tau, pseudo_observations
from copula_app.errors import DegenerateSampleError, DomainError, FitError
from copula_app.rng import stream

UNIT = TwoComponentParams(alpha1=1.0, alpha2=1.0)
REFERENCE = TwoComponentParams(alpha1=3.387732, alpha2=1.181292)


def unit_cdf(u, v):
    return u * v / (u + v - u * v)


def unit_density(u, v):
    return 2.0 * u * v / (u + v - u * v) ** 3


def interior_grid(k: int):
    axis = np.arange(1, k + 1) / (k + 1.0)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    return uu.ravel(), vv.ravel()


class TestParams:
    @pytest.mark.parametrize("a1,a2", [(0.0, 1.0), (1.0, -2.0), (np.inf, 1.0)])
    def test_invalid(self, a1, a2):
        with pytest.raises(DomainError):
            TwoComponentParams(alpha1=a1, alpha2=a2)

    def test_model_margins(self):
        m = ModelParams(REFERENCE, sigma1=1.0, sigma2=0.9)
        assert m.margins[1].sigma == 0.9
        assert m.margins[1].alpha == REFERENCE.alpha2
        with pytest.raises(DomainError):
            ModelParams(REFERENCE, sigma1=0.0)


class TestCdf:
    @pytest.mark.parametrize("method", ["adaptive", "laguerre"])
    def test_unit_closed_form(self, method):
        assert tc_cdf(UNIT, 0.5, 0.5, method=method) == pytest.approx(1.0 / 3.0, abs=1e-10)
        u, v = interior_grid(50)
        assert_allclose(tc_cdf(UNIT, u, v, method=method), unit_cdf(u, v), atol=1e-8)

    def test_boundaries(self):
        assert tc_cdf(REFERENCE, 0.7, 1.0) == 0.7
        assert tc_cdf(REFERENCE, 1.0, 0.3) == 0.3
        assert tc_cdf(REFERENCE, 0.0, 0.4) == 0.0
        assert tc_cdf(REFERENCE, 0.4, 0.0) == 0.0
        assert tc_cdf(REFERENCE, 1.0, 1.0) == 1.0

    def test_shape_and_domain(self):
        u = np.full((3, 4), 0.3)
        assert tc_cdf(REFERENCE, u, 0.6).shape == (3, 4)
        with pytest.raises(DomainError):
            tc_cdf(REFERENCE, 1.2, 0.5)
        with pytest.raises(DomainError):
            tc_cdf(REFERENCE, 0.5, 0.5, method="simpson")

    def test_laguerre_matches_adaptive(self):
        u, v = interior_grid(15)
        assert laguerre_is_reliable(REFERENCE)
        assert_allclose(tc_cdf(REFERENCE, u, v, method="laguerre"), tc_cdf(REFERENCE, u, v), atol=1e-8)

    def test_unreliable_laguerre_falls_back(self):
        p = TwoComponentParams(alpha1=1.0, alpha2=35.0)
        assert not laguerre_is_reliable(p)
        u, v = interior_grid(5)
        assert_allclose(tc_cdf(p, u, v, method="laguerre"), tc_cdf(p, u, v), atol=1e-12)

    def test_frechet_bounds(self, rng):
        u, v = rng.uniform(0.0, 1.0, (2, 200))
        c = tc_cdf(TwoComponentParams(alpha1=0.4, alpha2=7.0), u, v)
        assert np.all(c >= np.maximum(u + v - 1.0, 0.0))
        assert np.all(c <= np.minimum(u, v))

    def test_two_increasing(self, rng):
        p = TwoComponentParams(alpha1=rng.uniform(0.3, 5.0), alpha2=rng.uniform(0.3, 5.0))
        lo = rng.uniform(0.0, 1.0, (1000, 2))
        hi = np.minimum(lo + rng.uniform(0.0, 0.3, (1000, 2)), 1.0)
        volume = (
            tc_cdf(p, hi[:, 0], hi[:, 1]) - tc_cdf(p, lo[:, 0], hi[:, 1])
            - tc_cdf(p, hi[:, 0], lo[:, 1]) + tc_cdf(p, lo[:, 0], lo[:, 1])
        )
        assert volume.min() >= -1e-9

    def test_asymmetry(self):
        u, v = interior_grid(9)
        p = TwoComponentParams(alpha1=1.0, alpha2=35.0)
        assert np.max(np.abs(tc_cdf(p, u, v) - tc_cdf(p, v, u))) > 1e-4
        q = TwoComponentParams(alpha1=2.5, alpha2=2.5)
        assert np.max(np.abs(tc_cdf(q, u, v) - tc_cdf(q, v, u))) < 1e-10

    def test_joint_survival_identity(self, rng):
        u, v = rng.uniform(0.05, 0.95, (2, 50))
        survival = tc_joint_survival(REFERENCE, u, v)
        assert_allclose(survival, 1.0 - u - v + tc_cdf(REFERENCE, u, v), atol=1e-9)
        assert tc_joint_survival(REFERENCE, 0.0, 0.3) == pytest.approx(0.7)


class TestDensity:
    def test_unit_closed_form(self):
        assert tc_density(UNIT, 0.5, 0.5) == pytest.approx(unit_density(0.5, 0.5), rel=1e-12)
        assert tc_density(UNIT, 0.5, 0.5) == pytest.approx(1.185185185185, rel=1e-10)
        assert tc_density(UNIT, 0.9, 0.1) == pytest.approx(unit_density(0.9, 0.1), rel=1e-12)

    def test_positive_for_extreme_alphas(self):
        u, v = interior_grid(20)
        for p in (TwoComponentParams(0.5, 0.7), TwoComponentParams(30.0, 35.0)):
            c = tc_density(p, u, v)
            assert np.all(np.isfinite(c))
            assert np.all(c > 0)

    @pytest.mark.parametrize("point", [(0.0, 0.5), (0.5, 1.0), (1.2, 0.5)])
    def test_boundary_is_rejected(self, point):
        with pytest.raises(DomainError):
            tc_density(REFERENCE, *point)

    def test_log_density_consistent(self):
        assert tc_log_density(REFERENCE, 0.3, 0.8) == pytest.approx(np.log(tc_density(REFERENCE, 0.3, 0.8)))

    def test_mass_on_rectangle(self):
        p = TwoComponentParams(alpha1=2.0, alpha2=3.0)
        mass, _ = integrate.dblquad(lambda v, u: tc_density(p, u, v), 0.2, 0.8, 0.2, 0.8, epsabs=1e-10)
        expected = tc_cdf(p, 0.8, 0.8) - tc_cdf(p, 0.2, 0.8) - tc_cdf(p, 0.8, 0.2) + tc_cdf(p, 0.2, 0.2)
        assert mass == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("p", [REFERENCE, TwoComponentParams(alpha1=2.0, alpha2=3.0)], ids=["reference", "2-3"])
    def test_integrates_to_one(self, p):
        def density(v, u):
            return tc_density(p, np.clip(u, 1e-300, 1.0 - 1e-15), np.clip(v, 1e-300, 1.0 - 1e-15))

        mass, _ = integrate.dblquad(density, 0.0, 1.0, 0.0, 1.0, epsabs=1e-8, epsrel=1e-8)
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_matches_cdf_mixed_difference(self, rng):
        h = 1e-3
        for _ in range(100):
            p = TwoComponentParams(alpha1=rng.uniform(0.3, 5.0), alpha2=rng.uniform(0.3, 5.0))
            u, v = rng.uniform(0.1, 0.9, 2)
            corners = tc_cdf(p, [u + h, u + h, u - h, u - h], [v + h, v - h, v + h, v - h])
            numeric = (corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * h * h)
            assert numeric == pytest.approx(tc_density(p, u, v), rel=2e-3, abs=1e-3)


class TestSampling:
    def test_margins_are_pareto(self):
        m = ModelParams(REFERENCE, sigma1=1.0, sigma2=0.9)
        n = 10_000
        s = tc_sample(m, n, stream(5))
        for x, margin in ((s.x1, m.margins[0]), (s.x2, m.margins[1])):
            assert np.all(x > 0)
            ks = stats.kstest(x, lambda q: pareto2_cdf(margin, q)).statistic
            assert ks < 1.63 / np.sqrt(n)

    def test_deterministic(self):
        m = ModelParams(REFERENCE, sigma1=1.0, sigma2=0.9)
        assert np.array_equal(tc_sample(m, 100, stream(9, 0)).data, tc_sample(m, 100, stream(9, 0)).data)

    def test_empty_sample_rejected(self):
        with pytest.raises(DomainError):
            tc_sample(ModelParams(UNIT), 0, stream(1))
        with pytest.raises(DomainError):
            tc_sample_uniform(UNIT, 0, stream(1))

    def test_uniform_margins(self):
        n = 10_000
        draws = tc_sample_uniform(REFERENCE, n, stream(6))
        assert np.all((draws > 0) & (draws < 1))
        for j in range(2):
            assert stats.kstest(draws[:, j], "uniform").statistic < 1.63 / np.sqrt(n)

    def test_uniform_pairs_share_ranks_with_losses(self):
        n = 2000
        losses = tc_sample(ModelParams(UNIT), n, stream(8, 1))
        uniform = tc_sample_uniform(UNIT, n, stream(8, 1))
        assert kendall_tau(uniform) == pytest.approx(kendall_tau(losses), abs=1e-12)

    def test_large_alphas_concentrate_on_diagonal(self):
        draws = tc_sample_uniform(TwoComponentParams(alpha1=30.0, alpha2=35.0), 10_000, stream(12))
        assert np.mean(np.abs(draws[:, 0] - draws[:, 1]) < 0.1) > 0.19

    def test_empirical_copula_converges(self):
        draws = tc_sample_uniform(REFERENCE, 10_000, stream(13))
        u, v = interior_grid(20)
        gap = np.abs(empirical_copula(PseudoSample(draws), u, v) - tc_cdf(REFERENCE, u, v))
        assert gap.max() < 0.025

    def test_pseudo_observations_invariant_to_monotone_maps(self):
        s = tc_sample(ModelParams(REFERENCE), 500, stream(14))
        squared = pseudo_observations(s.data ** 2)
        assert np.array_equal(pseudo_observations(s).data, squared.data)


class TestTailCurve:
    def test_default_model_has_zero_verdict(self):
        curve = tc_lambda_u_curve(REFERENCE)
        assert curve.t.size == 40
        assert curve.t.min() == pytest.approx(1e-6)
        assert curve.values[np.argmin(curve.t)] < 1e-3
        assert curve.verdict == "zero"
        assert curve.limit == 0.0

    def test_unit_closed_form(self):
        t = default_tail_grid()
        curve = tc_lambda_u_curve(UNIT, t)
        expected = 2.0 * ((1.0 + t) ** -2 - (1.0 + 2.0 * t) ** -2)
        assert_allclose(curve.values, expected, atol=1e-6)
        assert curve.verdict == "zero"

    def test_agrees_with_joint_survival(self):
        t = 1e-5
        value = tc_lambda_u_curve(REFERENCE, [t]).values[0]
        survival_ratio = tc_joint_survival(REFERENCE, 1.0 - t, 1.0 - t) / t
        assert value == pytest.approx(survival_ratio, abs=1e-3)

    def test_values_are_nonnegative(self):
        curve = tc_lambda_u_curve(TwoComponentParams(alpha1=0.6, alpha2=0.8))
        assert np.all(curve.values >= 0)
        assert np.all(curve.values <= 2.0 + 1e-9)

    @pytest.mark.parametrize("t", [[0.0, 0.1], [0.1, 0.6], []])
    def test_invalid_grid(self, t):
        with pytest.raises(DomainError):
            tc_lambda_u_curve(REFERENCE, t)

    def test_verdict_rules(self):
        t = np.array([1e-4, 1e-3, 1e-2, 0.1])
        assert tail_verdict(t, np.array([1e-4, 5e-4, 2e-3, 0.3])) == "zero"
        assert tail_verdict(t, np.array([0.2, 0.3, 0.4, 0.5])) == "undetermined"
        assert tail_verdict(t, np.array([5e-4, 1e-4, 2e-3, 0.3])) == "undetermined"

    def test_copula_lambda_u_is_a_curve(self):
        assert TwoComponentCopula(UNIT).lambda_u().verdict == "zero"


class TestFitting:
    def test_margin_fit_on_reference_data(self, reference_sample):
        p = tc_fit_margins(reference_sample)
        assert 2.0 < p.alpha1 < 6.0
        assert 0.9 < p.alpha2 < 1.6

    def test_margin_fit_consistency(self):
        s = tc_sample(ModelParams(UNIT), 10_000, stream(15))
        p = tc_fit_margins(s)
        assert p.alpha1 == pytest.approx(1.0, abs=0.1)
        assert p.alpha2 == pytest.approx(1.0, abs=0.1)

    def test_light_tailed_margin_fails(self):
        u = stream(16).uniform(size=(2000, 2))
        # GPD(xi=-0.5, sigma=1) quantiles: bounded support, negative shape
        data = 2.0 * (1.0 - np.sqrt(1.0 - u))
        with pytest.raises(FitError):
            tc_fit_margins(LossSample(data))

    def test_pseudo_likelihood_unit(self):
        ps = pseudo_observations(tc_sample_uniform(UNIT, 5000, stream(17)))
        p = tc_fit_pseudo_likelihood(ps)
        assert 0.85 < p.alpha1 < 1.15
        assert 0.85 < p.alpha2 < 1.15

    def test_pseudo_likelihood_reference(self):
        ps = pseudo_observations(tc_sample_uniform(REFERENCE, 5000, stream(18)))
        p = tc_fit_pseudo_likelihood(ps, start=TwoComponentParams(3.0, 1.2))
        assert p.alpha1 == pytest.approx(REFERENCE.alpha1, rel=0.2)
        assert p.alpha2 == pytest.approx(REFERENCE.alpha2, rel=0.2)

    def test_pseudo_likelihood_edge_optimum(self):
        x = stream(20).lognormal(size=200)
        ps = pseudo_observations(np.column_stack([x, 2.0 * x]))
        with pytest.raises(FitError, match="boundary"):
            tc_fit_pseudo_likelihood(ps)
        p = tc_fit_pseudo_likelihood(ps, allow_boundary=True)
        assert max(p.alpha1, p.alpha2) == pytest.approx(FIT_ALPHA_MAX, rel=1e-3)
        assert TwoComponentCopula.fit_pseudo(ps, allow_boundary=True).p == p

    def test_pseudo_likelihood_needs_ten_points(self):
        ps = pseudo_observations(tc_sample_uniform(UNIT, 5, stream(19)))
        with pytest.raises(DegenerateSampleError):
            tc_fit_pseudo_likelihood(ps)

    def test_copula_fitters(self, reference_sample):
        fitted = TwoComponentCopula.fit_margins(reference_sample)
        assert set(fitted.params) == {"alpha1", "alpha2"}
        assert fitted.describe().startswith("two-component(")
