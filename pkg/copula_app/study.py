"""Simulation study: simulate the loss model, fit every family, test the fits
and correct the decisions for multiple testing."""

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from copula_app.copulas import Copula, GaussianCopula, GumbelCopula, TailCurve, TwoComponentCopula
from copula_app.copulas.two_component import ModelParams, TwoComponentParams, fit_margin_gpds, tc_sample
from copula_app.distributions import GpdFit
from copula_app.empirical import LossSample, kendall_tau
from copula_app.errors import DegenerateSampleError, DomainError, FitError
from copula_app.gof import BhResult, GofConfig, GofReport, TcEstimator, bh_correct, gof_test
from copula_app.rng import derive_seed, stream

MIN_STUDY_N = 50
DEFAULT_FAMILIES = ("gaussian", "gumbel", "two-component")


@dataclass
class FamilyResult:
    """Headline fit, tail dependence and GoF outcome for one family.

    A family whose fit is invalid keeps its error message in fit_error (and
    gof_error for the test); the study carries on with the other families.
    """
    family: str
    fitted: Copula | None = None
    lambda_u: float | TailCurve | None = None
    fit_error: str | None = None
    gof: GofReport | None = None
    gof_error: str | None = None

    @property
    def completed(self) -> bool:
        return self.gof is not None


@dataclass
class StudyReport:
    n: int
    seed: int | None
    beta: float
    tau_hat: float
    results: list[FamilyResult]
    bh: BhResult | None
    model: ModelParams | None = None
    margin_fits: tuple[GpdFit, GpdFit] | None = None
    external_p_values: dict[str, float] = field(default_factory=dict)

    @property
    def gof_reports(self) -> list[GofReport]:
        return [r.gof for r in self.results if r.gof is not None]

    @property
    def bh_threshold(self) -> float | None:
        return self.bh.threshold if self.bh else None

    @property
    def bh_decisions(self) -> list[tuple[str, bool]]:
        return self.bh.decisions if self.bh else []

    @property
    def lambda_u_estimates(self) -> list[tuple[str, float | TailCurve]]:
        return [(r.family, r.lambda_u) for r in self.results if r.lambda_u is not None]

    def result(self, family: str) -> FamilyResult:
        for r in self.results:
            if r.family == family:
                return r
        raise KeyError(family)


def family_configs(
    families: Sequence[str],
    seed: int,
    bootstrap_k: int = 1000,
    tc_estimator: TcEstimator | str = TcEstimator.PSEUDO_LIKELIHOOD,
    threads: int = 1,
) -> list[GofConfig]:
    """One GofConfig per family; family i bootstraps from seed derive_seed(seed, i + 1)."""
    return [
        GofConfig(
            copula_family=family,
            bootstrap_k=bootstrap_k,
            seed=derive_seed(seed, i + 1),
            tc_estimator=tc_estimator,
            threads=threads,
        )
        for i, family in enumerate(families)
    ]


def headline_fit(
    family: str, sample: LossSample, tau_hat: float, margin_fits: tuple[GpdFit, GpdFit] | None = None
) -> Copula:
    """Tau inversion for Gaussian and Gumbel, margin MLE for the Two-component copula.

    margin_fits, when given, are the GPD fits of sample and are reused.
    """
    if family == GaussianCopula.name:
        return GaussianCopula.fit_tau(tau_hat)
    if family == GumbelCopula.name:
        return GumbelCopula.fit_tau(tau_hat)
    if family == TwoComponentCopula.name:
        return TwoComponentCopula.fit_margins(sample, margin_fits)
    raise ValueError(f"no headline fit for family '{family}'")


def analyse_sample(
    sample: LossSample,
    configs: Sequence[GofConfig],
    beta: float = 0.05,
    external_p_values: Mapping[str, float] | None = None,
) -> StudyReport:
    """Fit, test and BH-correct every configured family on an existing sample.

    external_p_values are extra tests run elsewhere; they join the BH
    correction so m counts them too.
    """
    tau_hat = kendall_tau(sample)
    logging.info(f"Study // n={sample.n}, tau_hat={tau_hat:.6g}")

    margin_fits = None
    try:
        margin_fits = fit_margin_gpds(sample)
    except (FitError, DomainError) as e:
        logging.warning(f"Study // marginal GPD fits failed: {e}")

    results = []
    for cfg in configs:
        result = FamilyResult(family=cfg.copula_family)
        try:
            result.fitted = headline_fit(cfg.copula_family, sample, tau_hat, margin_fits)
            result.lambda_u = result.fitted.lambda_u()
            logging.info(f"Study // {result.fitted.describe()}")
        except (FitError, DomainError) as e:
            result.fit_error = str(e)
            logging.warning(f"Study // {cfg.copula_family}: fit invalid: {e}")

        try:
            result.gof = gof_test(sample, cfg)
        except (FitError, DegenerateSampleError, DomainError) as e:
            result.gof_error = str(e)
            logging.warning(f"Study // {cfg.copula_family}: test fails: {e}")
        results.append(result)

    p_values = [(r.family, r.gof.p_value) for r in results if r.gof is not None]
    external = dict(external_p_values or {})
    p_values.extend(external.items())
    bh = bh_correct(p_values, beta) if p_values else None
    if bh:
        logging.info(f"Study // BH threshold {bh.threshold:.6g} over m={bh.m} tests")

    return StudyReport(
        n=sample.n,
        seed=None,
        beta=beta,
        tau_hat=tau_hat,
        results=results,
        bh=bh,
        margin_fits=margin_fits,
        external_p_values=external,
    )


def run_study(
    model: ModelParams,
    n: int,
    configs: Sequence[GofConfig],
    beta: float = 0.05,
    seed: int = 0,
    external_p_values: Mapping[str, float] | None = None,
) -> tuple[LossSample, StudyReport]:
    """Simulate n pairs from the loss model with stream (seed, 0) and analyse them.

    Raises:
        DomainError: If n < 50
    """
    if n < MIN_STUDY_N:
        raise DomainError(f"study needs n >= {MIN_STUDY_N}, got {n}")
    logging.info(f"Study // simulating n={n} from {model}")
    sample = tc_sample(model, n, stream(seed, 0))
    report = analyse_sample(sample, configs, beta=beta, external_p_values=external_p_values)
    report.seed = seed
    report.model = model
    return sample, report


def draw_model_params(rng: np.random.Generator, sigma1: float = 1.0, sigma2: float = 0.9) -> ModelParams:
    """Random loss model with GPD shapes xi_i uniform on (0, 1] and alpha_i = 1 / xi_i."""
    xi = 1.0 - rng.uniform(0.0, 1.0, 2)
    return ModelParams(
        tc=TwoComponentParams(alpha1=float(1.0 / xi[0]), alpha2=float(1.0 / xi[1])),
        sigma1=sigma1,
        sigma2=sigma2,
    )
