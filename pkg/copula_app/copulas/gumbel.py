"""Gumbel copula and the extreme-value (Pickands) representation it shares."""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from copula_app.copulas.base import Copula, broadcast_uv, clip_open_unit, restore_shape
from copula_app.empirical import kendall_tau
from copula_app.errors import DomainError, FitError

# Endpoint offset for the extreme-value tau integral.
_EV_EPS = 1e-8


@dataclass(frozen=True)
class GumbelParams:
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.theta) and self.theta >= 1.0):
            raise DomainError(f"Gumbel copula needs theta >= 1, got {self.theta}")


def gumbel_cdf(p: GumbelParams, u, v):
    """exp(-[(-ln u)^theta + (-ln v)^theta]^(1/theta)), summed in log space."""
    u, v, shape = broadcast_uv(u, v)
    out = np.where((u == 0) | (v == 0), 0.0, np.minimum(u, v))
    out = np.where(u == 1, v, out)
    out = np.where(v == 1, u, out)
    interior = (u > 0) & (u < 1) & (v > 0) & (v < 1)
    if interior.any():
        a = p.theta * np.log(-np.log(u[interior]))
        b = p.theta * np.log(-np.log(v[interior]))
        out[interior] = np.exp(-np.exp(np.logaddexp(a, b) / p.theta))
    return restore_shape(out, shape)


def gumbel_tau(p: GumbelParams) -> float:
    return 1.0 - 1.0 / p.theta


def gumbel_fit_from_tau(tau_hat: float) -> GumbelParams:
    """theta = 1 / (1 - tau_hat).

    Raises:
        FitError: If tau_hat < 0 or tau_hat >= 1
    """
    tau_hat = float(tau_hat)
    if not np.isfinite(tau_hat) or tau_hat >= 1.0:
        raise FitError(f"Gumbel copula: tau_hat >= 1 (tau_hat={tau_hat})")
    if tau_hat < 0.0:
        raise FitError(f"Gumbel copula: tau_hat < 0 (tau_hat={tau_hat})")
    return GumbelParams(theta=1.0 / (1.0 - tau_hat))


def gumbel_lambda_u(p: GumbelParams) -> float:
    return float(2.0 - 2.0 ** (1.0 / p.theta))


def positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive stable draws with Laplace transform exp(-s^alpha), 0 < alpha <= 1.

    Chambers-Mallows-Stuck / Kanter representation.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"stable index must lie in (0, 1], got {alpha}")
    angle = rng.uniform(0.0, np.pi, n)
    e = rng.standard_exponential(n)
    if alpha == 1.0:
        return np.ones(n)
    return (
        np.sin(alpha * angle) / np.sin(angle) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * angle) / e) ** ((1.0 - alpha) / alpha)
    )


def gumbel_sample(p: GumbelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Marshall-Olkin frailty: U_i = exp(-(E_i / S)^(1/theta)), S positive stable of index 1/theta."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    s = positive_stable(1.0 / p.theta, n, rng)
    e = rng.standard_exponential((n, 2))
    return clip_open_unit(np.exp(-((e / s[:, None]) ** (1.0 / p.theta))))


def pickands_gumbel(theta: float, t):
    """A(t) = (t^theta + (1 - t)^theta)^(1/theta)."""
    t = np.asarray(t, dtype=float)
    out = (t ** theta + (1.0 - t) ** theta) ** (1.0 / theta)
    return float(out) if out.ndim == 0 else out


def pickands_gumbel_d1(theta: float, t):
    t = np.asarray(t, dtype=float)
    g = t ** theta + (1.0 - t) ** theta
    out = g ** (1.0 / theta - 1.0) * (t ** (theta - 1.0) - (1.0 - t) ** (theta - 1.0))
    return float(out) if out.ndim == 0 else out


def pickands_gumbel_d2(theta: float, t):
    t = np.asarray(t, dtype=float)
    g = t ** theta + (1.0 - t) ** theta
    diff = t ** (theta - 1.0) - (1.0 - t) ** (theta - 1.0)
    out = (theta - 1.0) * (
        g ** (1.0 / theta - 1.0) * (t ** (theta - 2.0) + (1.0 - t) ** (theta - 2.0))
        - g ** (1.0 / theta - 2.0) * diff * diff
    )
    return float(out) if out.ndim == 0 else out


def ev_copula_cdf(pickands: Callable, u, v):
    """Extreme-value copula (uv)^A(ln v / ln uv) for a Pickands function A."""
    u, v, shape = broadcast_uv(u, v)
    out = np.where((u == 0) | (v == 0), 0.0, np.minimum(u, v))
    out = np.where(u == 1, v, out)
    out = np.where(v == 1, u, out)
    interior = (u > 0) & (u < 1) & (v > 0) & (v < 1)
    if interior.any():
        log_uv = np.log(u[interior]) + np.log(v[interior])
        t = np.log(v[interior]) / log_uv
        out[interior] = np.exp(log_uv * np.asarray(pickands(t)))
    return restore_shape(out, shape)


def ev_tau_gumbel(theta: float, order: int = 100) -> float:
    """Kendall's tau of the extreme-value form, integral of t(1-t) A''(t) / A(t)."""
    if theta == 1.0:
        return 0.0

    def integrand(t):
        return t * (1.0 - t) * pickands_gumbel_d2(theta, t) / pickands_gumbel(theta, t)

    value, _ = integrate.fixed_quad(integrand, _EV_EPS, 1.0 - _EV_EPS, n=order)
    return float(value)


class GumbelCopula(Copula):
    name = "gumbel"

    def __init__(self, params: GumbelParams):
        self.p = params

    @property
    def params(self) -> dict[str, float]:
        return {"theta": self.p.theta}

    def cdf(self, u, v):
        return gumbel_cdf(self.p, u, v)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return gumbel_sample(self.p, n, rng)

    def lambda_u(self) -> float:
        return gumbel_lambda_u(self.p)

    @classmethod
    def fit_pseudo(cls, ps) -> "GumbelCopula":
        return cls.fit_tau(kendall_tau(ps))

    @classmethod
    def fit_tau(cls, tau_hat: float) -> "GumbelCopula":
        params = gumbel_fit_from_tau(tau_hat)
        logging.debug(f"Gumbel // tau_hat={tau_hat:.6g} -> theta={params.theta:.6g}")
        return cls(params)
