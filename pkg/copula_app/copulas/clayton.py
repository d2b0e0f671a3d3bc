"""Clayton copula (sampling comparison only, no fitting)."""

import numpy as np

from copula_app.copulas.base import broadcast_uv, clip_open_unit, restore_shape
from copula_app.errors import DomainError


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (np.isfinite(theta) and theta > 0):
        raise DomainError(f"Clayton copula needs theta > 0, got {theta}")
    return theta


def clayton_cdf(theta: float, u, v):
    """(u^-theta + v^-theta - 1)^(-1/theta)."""
    theta = _check_theta(theta)
    u, v, shape = broadcast_uv(u, v)
    out = np.where((u == 0) | (v == 0), 0.0, np.minimum(u, v))
    interior = (u > 0) & (v > 0)
    if interior.any():
        # u^-theta - 1 written with expm1 to keep precision near u = 1.
        s = np.expm1(-theta * np.log(u[interior])) + np.expm1(-theta * np.log(v[interior]))
        out[interior] = np.exp(-np.log1p(s) / theta)
    return restore_shape(out, shape)


def clayton_tau(theta: float) -> float:
    theta = _check_theta(theta)
    return theta / (theta + 2.0)


def clayton_sample(theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Marshall-Olkin construction U_i = (1 + W_i / S)^(-1/theta).

    W_i ~ Exp(1) and S ~ Gamma(1/theta, 1). (1 + W_i / S)^(+1/theta) lives on
    (1, inf); its reciprocal is the uniform-margin pair returned here.
    """
    theta = _check_theta(theta)
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    s = rng.standard_gamma(1.0 / theta, n)
    w = rng.standard_exponential((n, 2))
    return clip_open_unit(np.exp(-np.log1p(w / s[:, None]) / theta))
