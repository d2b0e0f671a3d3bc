"""Gaussian copula."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from copula_app.copulas.base import Copula, broadcast_uv, clip_open_unit, restore_shape
from copula_app.empirical import kendall_tau
from copula_app.errors import DomainError, FitError
from copula_app.special_fn import bivariate_normal_cdf


@dataclass(frozen=True)
class GaussianParams:
    r12: float

    def __post_init__(self):
        if not -1.0 < self.r12 < 1.0:
            raise DomainError(f"Gaussian copula needs |r12| < 1, got {self.r12}")


def gauss_cdf(p: GaussianParams, u, v):
    u, v, shape = broadcast_uv(u, v)
    out = np.minimum(u, v)
    out = np.where((u == 0) | (v == 0), 0.0, out)
    out = np.where(u == 1, v, out)
    out = np.where(v == 1, u, out)
    interior = (u > 0) & (u < 1) & (v > 0) & (v < 1)
    if interior.any():
        out[interior] = bivariate_normal_cdf(special.ndtri(u[interior]), special.ndtri(v[interior]), p.r12)
    return restore_shape(out, shape)


def gauss_tau(p: GaussianParams) -> float:
    """Kendall's tau of the Gaussian copula, (2 / pi) * arcsin(r12)."""
    return float(2.0 / np.pi * np.arcsin(p.r12))


def gauss_fit_from_tau(tau_hat: float) -> GaussianParams:
    """r12 = sin(pi * tau_hat / 2).

    Raises:
        FitError: If |tau_hat| >= 1
    """
    tau_hat = float(tau_hat)
    if not np.isfinite(tau_hat) or abs(tau_hat) >= 1.0:
        raise FitError(f"Gaussian copula: |tau_hat| >= 1 (tau_hat={tau_hat})")
    return GaussianParams(r12=float(np.sin(np.pi * tau_hat / 2.0)))


def gauss_sample(p: GaussianParams, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    z = rng.standard_normal((n, 2))
    z[:, 1] = p.r12 * z[:, 0] + np.sqrt(1.0 - p.r12 * p.r12) * z[:, 1]
    return clip_open_unit(special.ndtr(z))


class GaussianCopula(Copula):
    name = "gaussian"

    def __init__(self, params: GaussianParams):
        self.p = params

    @property
    def params(self) -> dict[str, float]:
        return {"r12": self.p.r12}

    def cdf(self, u, v):
        return gauss_cdf(self.p, u, v)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return gauss_sample(self.p, n, rng)

    def lambda_u(self) -> float:
        # No upper tail dependence for |r12| < 1.
        return 0.0

    @classmethod
    def fit_pseudo(cls, ps) -> "GaussianCopula":
        return cls.fit_tau(kendall_tau(ps))

    @classmethod
    def fit_tau(cls, tau_hat: float) -> "GaussianCopula":
        params = gauss_fit_from_tau(tau_hat)
        logging.debug(f"Gaussian // tau_hat={tau_hat:.6g} -> r12={params.r12:.6g}")
        return cls(params)
