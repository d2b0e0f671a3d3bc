"""Parametric-bootstrap goodness-of-fit test and multiple-testing correction."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np

from copula_app.copulas import COPULAS, Copula, TwoComponentCopula
from copula_app.copulas.two_component import ModelParams, tc_fit_margins, tc_sample
from copula_app.empirical import LossSample, PseudoSample, cvm_statistic, pseudo_observations
from copula_app.errors import ConfigError, DegenerateSampleError, DomainError, FitError
from copula_app.rng import stream


class TcEstimator(StrEnum):
    PSEUDO_LIKELIHOOD = "pseudo_likelihood"
    MARGIN_MLE = "margin_mle"


@dataclass(frozen=True)
class GofConfig:
    """Settings for one goodness-of-fit test.

    Attributes:
        copula_family: Registered family name
        bootstrap_k: Number of bootstrap iterations K
        seed: Base seed; iteration k draws from stream (seed, k)
        tc_estimator: How the Two-component copula is (re)fitted
        threads: Worker threads for the bootstrap loop
    """
    copula_family: str
    bootstrap_k: int = 1000
    seed: int = 0
    tc_estimator: TcEstimator = TcEstimator.PSEUDO_LIKELIHOOD
    threads: int = 1

    def __post_init__(self):
        if self.copula_family not in COPULAS:
            raise ConfigError(f"unknown copula family '{self.copula_family}' (available: {', '.join(COPULAS)})")
        if self.bootstrap_k < 1:
            raise ConfigError(f"bootstrap_k must be >= 1, got {self.bootstrap_k}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        try:
            object.__setattr__(self, "tc_estimator", TcEstimator(self.tc_estimator))
        except ValueError:
            raise ConfigError(
                f"unknown tc_estimator '{self.tc_estimator}' "
                f"(available: {', '.join(e.value for e in TcEstimator)})"
            ) from None


@dataclass
class GofReport:
    family: str
    fitted: Copula
    observed_statistic: float
    p_value: float
    valid_iterations: int
    skipped_iterations: int
    bootstrap_statistics: np.ndarray = field(repr=False)
    tc_estimator: str | None = None

    @property
    def fitted_params(self) -> dict[str, float]:
        return self.fitted.params


@dataclass(frozen=True)
class BhResult:
    threshold: float
    m: int
    decisions: list[tuple[str, bool]]


def bh_threshold(m: int, beta: float) -> float:
    """beta / sum_{j=1..m} 1/j."""
    return beta / float(np.sum(1.0 / np.arange(1, m + 1)))


def bh_correct(p_values: list[tuple[str, float]], beta: float = 0.05) -> BhResult:
    """Generalised Benjamini-Hochberg rule: reject H_i if p_i < beta / H_m.

    Raises:
        ValueError: If the list is empty, beta is outside (0, 1) or a p-value
            is outside [0, 1]
    """
    if not p_values:
        raise ValueError("bh_correct needs at least one p-value")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    for name, p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value for {name} outside [0, 1]: {p}")
    threshold = bh_threshold(len(p_values), beta)
    decisions = [(name, bool(p < threshold)) for name, p in p_values]
    return BhResult(threshold=threshold, m=len(p_values), decisions=decisions)


def uses_margin_mle(cfg: GofConfig) -> bool:
    return cfg.copula_family == TwoComponentCopula.name and cfg.tc_estimator == TcEstimator.MARGIN_MLE


def fit_family(cfg: GofConfig, sample: LossSample | None, ps: PseudoSample) -> Copula:
    """Step-2 fit of the configured family (FitError means the test fails).

    The pseudo-likelihood fit keeps an optimum on its search-box edge here, so
    neither step 2 nor a bootstrap refit fails for that reason.
    """
    if uses_margin_mle(cfg):
        if sample is None:
            raise FitError("margin MLE needs loss-scale data")
        return TwoComponentCopula.fit_margins(sample)
    if cfg.copula_family == TwoComponentCopula.name:
        start = None
        if sample is not None:
            try:
                start = tc_fit_margins(sample)
            except (FitError, DomainError) as e:
                logging.debug(f"GofTest // no margin-based start for the pseudo-likelihood fit: {e}")
        return TwoComponentCopula.fit_pseudo(ps, start=start, allow_boundary=True)
    return COPULAS[cfg.copula_family].fit_pseudo(ps)


def _bootstrap_statistic(fitted: Copula, n: int, cfg: GofConfig, k: int) -> float | None:
    rng = stream(cfg.seed, k)
    try:
        if uses_margin_mle(cfg):
            loss = tc_sample(ModelParams(fitted.p), n, rng)
            ps0 = pseudo_observations(loss)
            refit = fit_family(cfg, loss, ps0)
        else:
            ps0 = pseudo_observations(fitted.sample(n, rng))
            refit = fit_family(cfg, None, ps0)
    except (FitError, DegenerateSampleError) as e:
        logging.debug(f"GofTest // {cfg.copula_family}: iteration {k} skipped: {e}")
        return None
    return cvm_statistic(ps0, refit.cdf)


def gof_test(s: LossSample, cfg: GofConfig) -> GofReport:
    """Cramer-von Mises goodness-of-fit test with a parametric bootstrap.

    1. pseudo-observations of s
    2. fit the family; a FitError here means the test fails
    3-4. observed statistic against the empirical copula
    5. K iterations: sample n pairs from the fitted copula, re-rank, refit
       (invalid refits are skipped), compute the statistic
    6. p = #{valid k : stat_k >= observed} / (V + 1)

    Iteration k always uses stream (cfg.seed, k) and results are reduced in
    iteration order, so the report does not depend on cfg.threads.

    Raises:
        FitError: If the family cannot be fitted to s
    """
    ps = pseudo_observations(s)
    fitted = fit_family(cfg, s, ps)
    observed = cvm_statistic(ps, fitted.cdf)
    logging.info(f"GofTest // {cfg.copula_family}: fitted {fitted.describe()}, statistic={observed:.6g}")

    def run(k: int) -> float | None:
        return _bootstrap_statistic(fitted, s.n, cfg, k)

    iterations = range(cfg.bootstrap_k)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run, iterations))
    else:
        results = [run(k) for k in iterations]

    statistics = np.array([r for r in results if r is not None], dtype=float)
    valid = int(statistics.size)
    skipped = cfg.bootstrap_k - valid
    if skipped:
        logging.warning(f"GofTest // {cfg.copula_family}: {skipped} of {cfg.bootstrap_k} bootstrap iterations skipped (invalid refit)")
    p_value = float(np.count_nonzero(statistics >= observed)) / (valid + 1)
    logging.info(f"GofTest // {cfg.copula_family}: p={p_value:.6g} from {valid} valid iterations")

    return GofReport(
        family=cfg.copula_family,
        fitted=fitted,
        observed_statistic=observed,
        p_value=p_value,
        valid_iterations=valid,
        skipped_iterations=skipped,
        bootstrap_statistics=statistics,
        tc_estimator=cfg.tc_estimator.value if cfg.copula_family == TwoComponentCopula.name else None,
    )
