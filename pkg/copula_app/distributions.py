"""Univariate distributions of the loss model and its margins.

Exp(1), Gamma(alpha, 1), inverse-gamma, and the generalized Pareto / Pareto
type II family with location fixed at 0, including GPD maximum likelihood.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from copula_app.errors import DomainError, FitError

# Profile grid over the shape parameter; the left end -0.99 is excluded.
XI_LOWER = -0.99
XI_UPPER = 5.0
_XI_GRID = np.linspace(XI_LOWER, XI_UPPER, 121)[1:]
_XI_ZERO = 1e-10


@dataclass(frozen=True)
class GpdParams:
    """Generalized Pareto parameters with location mu = 0.

    Attributes:
        xi: Shape
        sigma: Scale, > 0
    """
    xi: float
    sigma: float
    mu: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.xi):
            raise DomainError(f"GPD shape must be finite, got {self.xi}")
        if not self.sigma > 0:
            raise DomainError(f"GPD scale must be > 0, got {self.sigma}")
        if self.mu != 0.0:
            raise DomainError("GPD location is fixed at 0")


@dataclass(frozen=True)
class ParetoIIParams:
    """Pareto type II (Lomax) parameters with location mu = 0.

    Attributes:
        sigma: Scale, > 0
        alpha: Tail index, > 0 (alpha = 1 / xi of the matching GPD)
    """
    sigma: float
    alpha: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"Pareto II scale must be > 0, got {self.sigma}")
        if not self.alpha > 0:
            raise DomainError(f"Pareto II shape must be > 0, got {self.alpha}")
        if self.mu != 0.0:
            raise DomainError("Pareto II location is fixed at 0")


@dataclass(frozen=True)
class GpdFit:
    params: GpdParams
    log_likelihood: float
    n: int


def _as_float(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def gpd_cdf(p: GpdParams, x):
    x = np.asarray(x, dtype=float)
    z = np.maximum(x, 0.0) / p.sigma
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if abs(p.xi) < _XI_ZERO:
            out = -np.expm1(-z)
        else:
            base = 1.0 + p.xi * z
            out = np.where(base > 0, -np.expm1(-np.log(np.maximum(base, 1e-300)) / p.xi), 1.0)
    out = np.where(x <= 0, 0.0, out)
    return _as_float(np.clip(out, 0.0, 1.0))


def gpd_logpdf(p: GpdParams, x):
    """Log density; -inf outside the support."""
    x = np.asarray(x, dtype=float)
    z = x / p.sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        if abs(p.xi) < _XI_ZERO:
            out = -np.log(p.sigma) - z
        else:
            base = 1.0 + p.xi * z
            out = np.where(
                base > 0,
                -np.log(p.sigma) - (1.0 + 1.0 / p.xi) * np.log1p(np.maximum(p.xi * z, -1.0)),
                -np.inf,
            )
    out = np.where(x < 0, -np.inf, out)
    return _as_float(out)


def gpd_log_likelihood(p: GpdParams, data) -> float:
    return float(np.sum(gpd_logpdf(p, np.asarray(data, dtype=float))))


def pareto2_cdf(p: ParetoIIParams, x):
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-p.alpha * np.log1p(np.maximum(x, 0.0) / p.sigma))
    return _as_float(np.where(x <= 0, 0.0, out))


def pareto2_quantile(p: ParetoIIParams, u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("pareto2_quantile requires 0 < u < 1")
    return _as_float(p.sigma * np.expm1(-np.log1p(-u) / p.alpha))


def pareto_from_gpd(g: GpdParams) -> ParetoIIParams:
    """GPD(xi, 0, sigma) with xi > 0 is Pareto II(0, sigma / xi, 1 / xi)."""
    if not g.xi > 0:
        raise DomainError(f"Pareto II mapping requires xi > 0 (heavy tail), got xi={g.xi}")
    return ParetoIIParams(sigma=g.sigma / g.xi, alpha=1.0 / g.xi)


def sample_exp1(rng: np.random.Generator, size=None):
    """Exp(1) draws."""
    return rng.standard_exponential(size)


def sample_gamma(alpha: float, rng: np.random.Generator, size=None):
    """Gamma(alpha, 1) draws (Marsaglia-Tsang in numpy's generator)."""
    if not alpha > 0:
        raise DomainError(f"Gamma shape must be > 0, got {alpha}")
    return rng.standard_gamma(alpha, size)


def sample_inverse_gamma(alpha: float, rng: np.random.Generator, size=None):
    """1 / G draws with G ~ Gamma(alpha, 1)."""
    return 1.0 / sample_gamma(alpha, rng, size)


def sample_feller_pareto(p: ParetoIIParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Pareto II draws as sigma * G1 / G2 with G1 ~ Gamma(1), G2 ~ Gamma(alpha)."""
    g1 = sample_gamma(1.0, rng, n)
    g2 = sample_gamma(p.alpha, rng, n)
    return p.sigma * g1 / g2


def _profile_sigma(xi: float, x: np.ndarray) -> tuple[float, float]:
    """Best scale and log-likelihood for a fixed shape."""
    n = x.size
    x_max = float(x.max())
    lo = max(-xi * x_max * (1.0 + 1e-9), float(x.min()) * 1e-6, 1e-300) if xi < 0 else float(x.min()) * 1e-6
    hi = x_max * 1e3

    def negloglik(log_sigma: float) -> float:
        sigma = np.exp(log_sigma)
        z = x / sigma
        if abs(xi) < _XI_ZERO:
            return n * log_sigma + float(z.sum())
        arg = xi * z
        if arg.min() <= -1.0:
            return np.inf
        return n * log_sigma + (1.0 + 1.0 / xi) * float(np.log1p(arg).sum())

    res = optimize.minimize_scalar(
        negloglik, bounds=(np.log(lo), np.log(hi)), method="bounded", options={"xatol": 1e-10}
    )
    return float(np.exp(res.x)), -float(res.fun)


def fit_gpd_mle(data) -> GpdFit:
    """Maximum likelihood GPD fit with mu fixed at 0.

    The log-likelihood is profiled over xi on a grid in (-0.99, 5]; for each xi
    the scale is optimised in log space. The best grid cell is then polished
    with a bounded golden-section/parabolic search to 1e-8 in xi.

    Args:
        data: At least 10 positive observations

    Returns:
        GpdFit with the fitted parameters and the attained log-likelihood

    Raises:
        DomainError: If any observation is not positive
        FitError: If the data are degenerate or the maximum cannot be bracketed
    """
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 10:
        raise FitError(f"GPD fit needs at least 10 observations, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("GPD fit requires finite positive observations")
    if np.all(x == x[0]):
        raise FitError("GPD fit: data are constant")

    profile = np.array([_profile_sigma(xi, x)[1] for xi in _XI_GRID])
    if not np.any(np.isfinite(profile)):
        raise FitError("GPD fit: log-likelihood is not finite anywhere on the shape grid")
    best = int(np.nanargmax(np.where(np.isfinite(profile), profile, -np.inf)))
    if best == 0:
        raise FitError(f"GPD fit: maximum not bracketed, shape runs into the lower bound {XI_LOWER}")

    left = _XI_GRID[best - 1]
    right = _XI_GRID[min(best + 1, _XI_GRID.size - 1)]
    res = optimize.minimize_scalar(
        lambda xi: -_profile_sigma(xi, x)[1],
        bounds=(left, right),
        method="bounded",
        options={"xatol": 1e-8},
    )
    xi_hat = float(res.x)
    sigma_hat, loglik = _profile_sigma(xi_hat, x)
    if loglik < profile[best]:
        xi_hat = float(_XI_GRID[best])
        sigma_hat, loglik = _profile_sigma(xi_hat, x)
    if not np.isfinite(loglik):
        raise FitError("GPD fit: non-finite log-likelihood at the optimum")

    logging.debug(f"GpdFit // xi={xi_hat:.6g} sigma={sigma_hat:.6g} loglik={loglik:.6g} n={x.size}")
    return GpdFit(params=GpdParams(xi=xi_hat, sigma=sigma_hat), log_likelihood=loglik, n=int(x.size))
