"""Special functions used by the distribution and copula formulas.

All functions broadcast over numpy arrays and return a Python float for
scalar input.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from copula_app.errors import DomainError

# Negative half of the 20-point Gauss-Legendre rule, paired by symmetry below.
_GL_X, _GL_W = (a[:10] for a in leggauss(20))
_TWO_PI = 2.0 * np.pi


def _scalar_or_array(value: np.ndarray):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"ln_gamma requires x > 0, got {x.min() if x.size else x}")
    return _scalar_or_array(special.gammaln(x))


def reg_lower_gamma(alpha, x):
    """Regularized lower incomplete gamma P(alpha, x), the Gamma(alpha, 1) CDF."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(alpha > 0)):
        raise DomainError("reg_lower_gamma requires alpha > 0")
    if np.any(~(x >= 0)):
        raise DomainError("reg_lower_gamma requires x >= 0")
    return _scalar_or_array(special.gammainc(alpha, x))


def ln_beta(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("ln_beta requires a > 0 and b > 0")
    return _scalar_or_array(special.betaln(a, b))


def std_normal_cdf(x):
    return _scalar_or_array(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("std_normal_quantile requires 0 < p < 1")
    return _scalar_or_array(special.ndtri(p))


def bivariate_normal_cdf(x, y, rho: float):
    """P(Z1 <= x, Z2 <= y) for standard normals with correlation rho.

    Genz's single-integral reduction of Drezner and Wesolowsky, evaluated with
    a fixed 20-point Gauss-Legendre rule (absolute error below 1e-14 in
    double precision). Infinite x or y are handled exactly.

    Args:
        x: Upper limit for the first coordinate (scalar or array)
        y: Upper limit for the second coordinate (scalar or array)
        rho: Correlation, -1 < rho < 1

    Returns:
        The bivariate normal CDF, broadcast over x and y

    Raises:
        DomainError: If |rho| >= 1 or an argument is NaN
    """
    rho = float(rho)
    if not -1.0 < rho < 1.0:
        raise DomainError(f"bivariate_normal_cdf requires |rho| < 1, got {rho}")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise DomainError("bivariate_normal_cdf received NaN")
    shape = x.shape
    x = x.ravel()
    y = y.ravel()

    out = np.empty(x.shape)
    neg = (x == -np.inf) | (y == -np.inf)
    x_inf = ~neg & (x == np.inf)
    y_inf = ~neg & ~x_inf & (y == np.inf)
    finite = ~(neg | x_inf | y_inf)

    out[neg] = 0.0
    out[x_inf] = special.ndtr(y[x_inf])
    out[y_inf] = special.ndtr(x[y_inf])
    if finite.any():
        out[finite] = _bvn_finite(x[finite], y[finite], rho)

    out = np.clip(out, 0.0, 1.0)
    return _scalar_or_array(out.reshape(shape))


def _bvn_finite(sh: np.ndarray, sk: np.ndarray, r: float) -> np.ndarray:
    h = -sh
    k = -sk
    hk = h * k
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        if abs(r) < 0.925:
            hs = (h * h + k * k) / 2.0
            asr = np.arcsin(r)
            total = np.zeros_like(h)
            for node, weight in zip(_GL_X, _GL_W):
                for sign in (1.0, -1.0):
                    sn = np.sin(asr * (sign * node + 1.0) / 2.0)
                    total += weight * np.exp((sn * hk - hs) / (1.0 - sn * sn))
            return total * asr / (2.0 * _TWO_PI) + special.ndtr(-h) * special.ndtr(-k)

        if r < 0:
            k = -k
            hk = -hk
        a_s = (1.0 - r) * (1.0 + r)
        a = np.sqrt(a_s)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        bvn = a * np.exp(-(bs / a_s + hk) / 2.0) * (
            1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0
        )
        b = np.sqrt(bs)
        tail = (
            np.exp(-hk / 2.0)
            * np.sqrt(_TWO_PI)
            * special.ndtr(-b / a)
            * b
            * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        )
        bvn = bvn - np.where(hk > -160.0, tail, 0.0)

        half = a / 2.0
        for node, weight in zip(_GL_X, _GL_W):
            xs = (half * (node + 1.0)) ** 2
            rs = np.sqrt(1.0 - xs)
            bvn = bvn + half * weight * (
                np.exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs
                - np.exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs))
            )
            xs = a_s * (1.0 - node) ** 2 / 4.0
            rs = np.sqrt(1.0 - xs)
            bvn = bvn + half * weight * np.exp(-(bs / xs + hk) / 2.0) * (
                np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs))
            )
        bvn = -bvn / _TWO_PI

        if r > 0:
            return bvn + special.ndtr(-np.maximum(h, k))
        return -bvn + np.maximum(0.0, special.ndtr(-h) - special.ndtr(-k))
