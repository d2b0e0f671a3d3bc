"""Two-component copula.

Losses X_i = sigma_i * W * Y_i with a shared W ~ Exp(1) and independent
Y_i = 1 / G_i, G_i ~ Gamma(alpha_i, 1). The margins are Pareto II(sigma_i,
alpha_i) and the copula depends on (alpha1, alpha2) only:

    C(u, v) = E[Q1(W / s1) Q2(W / s2)],   s_i = (1 - u_i)^(-1/alpha_i) - 1,

with Q_i the upper regularized incomplete gamma function. This equals
u + v - 1 + int F_G1 F_G2 e^-w dw but has no cancellation for small u, v.
"""

import functools
import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from copula_app.copulas.base import (
    Copula,
    TailCurve,
    broadcast_uv,
    clip_open_unit,
    restore_shape,
)
from copula_app.distributions import GpdFit, ParetoIIParams, fit_gpd_mle, sample_exp1, sample_inverse_gamma
from copula_app.empirical import LossSample, PseudoSample
from copula_app.errors import DegenerateSampleError, DomainError, FitError

LAGUERRE_ORDER = 200
# Beyond this alpha ratio (or below MIN_LAGUERRE_ALPHA) the fixed rule is not trusted.
LAGUERRE_MAX_RATIO = 20.0
MIN_LAGUERRE_ALPHA = 0.5
ADAPTIVE_RTOL = 1e-11
ADAPTIVE_ATOL = 1e-15

FIT_ALPHA_MIN = 0.05
FIT_ALPHA_MAX = 100.0

TAIL_T_MIN = 1e-6
TAIL_T_MAX = 0.5
TAIL_POINTS = 40
TAIL_ZERO_LEVEL = 1e-3
TAIL_WINDOW = 0.01

_CHUNK = 2048


@dataclass(frozen=True)
class TwoComponentParams:
    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name, value in (("alpha1", self.alpha1), ("alpha2", self.alpha2)):
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"Two-component copula needs {name} > 0, got {value}")


@dataclass(frozen=True)
class ModelParams:
    """Full loss model: copula shapes plus the margin scales."""
    tc: TwoComponentParams
    sigma1: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        for name, value in (("sigma1", self.sigma1), ("sigma2", self.sigma2)):
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"model needs {name} > 0, got {value}")

    @property
    def margins(self) -> tuple[ParetoIIParams, ParetoIIParams]:
        return (
            ParetoIIParams(sigma=self.sigma1, alpha=self.tc.alpha1),
            ParetoIIParams(sigma=self.sigma2, alpha=self.tc.alpha2),
        )


def _log_expm1(x: np.ndarray) -> np.ndarray:
    """log(e^x - 1) for x > 0 without overflow."""
    return x + np.log(-np.expm1(-x))


def _rate_terms(p: TwoComponentParams, u: np.ndarray, v: np.ndarray):
    """(c0, c1, c2) with c0 + c1 + c2 = 1 for interior (u, v).

    Substituting w = c0 * x gives C = int c0 Q1(c1 x) Q2(c2 x) e^(-c0 x) dx,
    an integrand that decays like e^-x for every (u, v).
    """
    l1 = -np.log1p(-u) / p.alpha1
    l2 = -np.log1p(-v) / p.alpha2
    log_s1 = _log_expm1(l1)
    log_s2 = _log_expm1(l2)
    log_d = _log_expm1(l1 + l2)
    return np.exp(log_s1 + log_s2 - log_d), np.exp(log_s2 - log_d), np.exp(log_s1 - log_d)


@functools.lru_cache(maxsize=4)
def _laguerre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_laguerre(order)
    positive = np.isfinite(w) & (w > 0)
    log_w = np.full(w.shape, -np.inf)
    log_w[positive] = np.log(w[positive])
    return x, log_w


def _integral_laguerre(p: TwoComponentParams, c0, c1, c2, order: int = LAGUERRE_ORDER) -> np.ndarray:
    x, log_w = _laguerre_rule(order)
    out = np.empty(c0.shape)
    with np.errstate(divide="ignore", under="ignore"):
        for start in range(0, c0.size, _CHUNK):
            block = slice(start, start + _CHUNK)
            k1 = c1[block, None]
            k2 = c2[block, None]
            log_terms = (
                log_w
                + np.log(special.gammaincc(p.alpha1, k1 * x))
                + np.log(special.gammaincc(p.alpha2, k2 * x))
                + (k1 + k2) * x
            )
            out[block] = c0[block] * np.exp(log_terms).sum(axis=1)
    return out


def _integral_adaptive(p: TwoComponentParams, c0, c1, c2, upper: bool = True) -> np.ndarray:
    """Tanh-sinh quadrature of c0 * R1(c1 x) * R2(c2 x) * e^(-c0 x) over [0, inf).

    R is the upper regularized gamma (copula) or the lower one (joint survival).
    """
    reg = special.gammaincc if upper else special.gammainc
    a1, a2 = p.alpha1, p.alpha2

    def integrand(x, c0, c1, c2):
        with np.errstate(under="ignore"):
            return c0 * reg(a1, c1 * x) * reg(a2, c2 * x) * np.exp(-c0 * x)

    res = integrate.tanhsinh(
        integrand, 0.0, np.inf, args=(c0, c1, c2), rtol=ADAPTIVE_RTOL, atol=ADAPTIVE_ATOL
    )
    values = np.array(res.integral, dtype=float, ndmin=1)
    failed = ~np.array(res.success, ndmin=1) | ~np.isfinite(values)
    for i in np.flatnonzero(failed):
        logging.debug(f"TwoComponent // tanh-sinh did not converge at c={c0[i]:.3g},{c1[i]:.3g},{c2[i]:.3g}; using QUADPACK")
        values[i], _ = integrate.quad(
            integrand, 0.0, np.inf, args=(c0[i], c1[i], c2[i]), epsabs=ADAPTIVE_ATOL, epsrel=1e-10, limit=200
        )
    return values


def laguerre_is_reliable(p: TwoComponentParams) -> bool:
    lo, hi = sorted((p.alpha1, p.alpha2))
    return lo >= MIN_LAGUERRE_ALPHA and hi / lo <= LAGUERRE_MAX_RATIO


def tc_cdf(p: TwoComponentParams, u, v, method: str = "adaptive"):
    """Two-component copula CDF.

    Args:
        p: Copula shapes
        u: First coordinate(s) in [0, 1]
        v: Second coordinate(s) in [0, 1]
        method: "adaptive" (tanh-sinh, ~1e-11) or "laguerre" (200-node
            Gauss-Laguerre, falls back to adaptive for very unequal or small
            alphas)

    Returns:
        C(u, v); the margin branches C(u, 1) = u, C(1, v) = v and C = 0 on the
        axes are exact
    """
    if method not in ("adaptive", "laguerre"):
        raise DomainError(f"unknown tc_cdf method '{method}'")
    u, v, shape = broadcast_uv(u, v)
    out = np.where((u == 0) | (v == 0), 0.0, np.minimum(u, v))
    out = np.where(u == 1, v, out)
    out = np.where(v == 1, u, out)
    interior = (u > 0) & (u < 1) & (v > 0) & (v < 1)
    if interior.any():
        ui, vi = u[interior], v[interior]
        c0, c1, c2 = _rate_terms(p, ui, vi)
        if method == "laguerre" and laguerre_is_reliable(p):
            values = _integral_laguerre(p, c0, c1, c2)
        else:
            values = _integral_adaptive(p, c0, c1, c2)
        # Frechet-Hoeffding bounds absorb the last bits of quadrature error.
        out[interior] = np.clip(values, np.maximum(ui + vi - 1.0, 0.0), np.minimum(ui, vi))
    return restore_shape(out, shape)


def tc_joint_survival(p: TwoComponentParams, u, v):
    """P(U > u, V > v) computed directly from E[P1(W / s1) P2(W / s2)]."""
    u, v, shape = broadcast_uv(u, v)
    out = np.where(u == 0, 1.0 - v, 0.0)
    out = np.where(v == 0, 1.0 - u, out)
    interior = (u > 0) & (u < 1) & (v > 0) & (v < 1)
    if interior.any():
        ui, vi = u[interior], v[interior]
        c0, c1, c2 = _rate_terms(p, ui, vi)
        values = _integral_adaptive(p, c0, c1, c2, upper=False)
        out[interior] = np.clip(values, 0.0, np.minimum(1.0 - ui, 1.0 - vi))
    return restore_shape(out, shape)


def _log_density(a1: float, a2: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    l1 = -np.log1p(-u) / a1
    l2 = -np.log1p(-v) / a2
    return (
        -(1.0 / a1 + 1.0) * np.log1p(-u)
        - (1.0 / a2 + 1.0) * np.log1p(-v)
        + a2 * _log_expm1(l1)
        + a1 * _log_expm1(l2)
        - np.log(a1 + a2 + 1.0)
        - special.betaln(a1 + 1.0, a2 + 1.0)
        - (a1 + a2 + 1.0) * _log_expm1(l1 + l2)
    )


def tc_log_density(p: TwoComponentParams, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any(~((u > 0) & (u < 1))) or np.any(~((v > 0) & (v < 1))):
        raise DomainError("Two-component density is defined on the open unit square only")
    out = _log_density(p.alpha1, p.alpha2, u, v)
    return float(out) if out.ndim == 0 else out


def tc_density(p: TwoComponentParams, u, v):
    """Copula density c(u, v), evaluated in log space and exponentiated."""
    out = np.exp(tc_log_density(p, u, v))
    return float(out) if np.ndim(out) == 0 else out


def tc_sample(m: ModelParams, n: int, rng: np.random.Generator) -> LossSample:
    """n loss pairs (sigma1 W Y1, sigma2 W Y2) sharing W within a pair.

    W ~ Exp(1) and Y_i = 1 / G_i with G_i ~ Gamma(alpha_i, 1).
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    w = sample_exp1(rng, n)
    y1 = sample_inverse_gamma(m.tc.alpha1, rng, n)
    y2 = sample_inverse_gamma(m.tc.alpha2, rng, n)
    return LossSample(np.column_stack([m.sigma1 * w * y1, m.sigma2 * w * y2]))


def tc_sample_uniform(p: TwoComponentParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Pairs with the Two-component copula on uniform margins.

    Uses the same draws as tc_sample, so U_i = F_i(X_i) pair by pair.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    w = sample_exp1(rng, n)
    y1 = sample_inverse_gamma(p.alpha1, rng, n)
    y2 = sample_inverse_gamma(p.alpha2, rng, n)
    u = -np.expm1(-p.alpha1 * np.log1p(w * y1))
    v = -np.expm1(-p.alpha2 * np.log1p(w * y2))
    return clip_open_unit(np.column_stack([u, v]))


def default_tail_grid() -> np.ndarray:
    return np.geomspace(TAIL_T_MIN, TAIL_T_MAX, TAIL_POINTS)


def _tail_term(a_i: float, a_j: float, t: np.ndarray) -> np.ndarray:
    """t^(1/a_i - 1) / a_i * int f_Gi(w t^(1/a_i)) F_Gj(w t^(1/a_j)) w e^-w dw."""
    log_t = np.log(t)
    log_pref = (1.0 / a_i - 1.0) * log_t - np.log(a_i)
    lgam = special.gammaln(a_i)

    def integrand(w, log_bi, log_bj, log_pref):
        with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
            yi = w * np.exp(log_bi)
            yj = w * np.exp(log_bj)
            log_f = special.xlogy(a_i - 1.0, yi) - yi - lgam
            log_cdf = np.log(special.gammainc(a_j, yj))
            value = np.exp(log_pref + log_f + log_cdf + np.log(w) - w)
        return np.where(np.isnan(value), 0.0, value)

    res = integrate.tanhsinh(
        integrand, 0.0, np.inf, args=(log_t / a_i, log_t / a_j, log_pref), rtol=1e-10, atol=1e-14
    )
    return np.array(res.integral, dtype=float, ndmin=1)


def tail_verdict(t: np.ndarray, values: np.ndarray, window: float = TAIL_WINDOW,
                 zero_level: float = TAIL_ZERO_LEVEL) -> str:
    """Verdict on the limit of a tail curve.

    Returns "zero" when the value at the smallest t is below zero_level and
    the curve falls monotonically toward it over t <= window, otherwise
    "undetermined".
    """
    order = np.argsort(t)
    t, values = t[order], values[order]
    if not values[0] < zero_level:
        return "undetermined"
    in_window = t <= window
    if in_window.sum() < 2:
        in_window[:2] = True
    if np.all(np.diff(values[in_window]) >= -1e-12):
        return "zero"
    return "undetermined"


def tc_lambda_u_curve(p: TwoComponentParams, t_grid=None, window: float = TAIL_WINDOW) -> TailCurve:
    """lambda_U(t) before the limit t -> 0, plus a verdict on the limit.

    Args:
        p: Copula shapes
        t_grid: Tail probabilities in (0, 0.5]; defaults to 40 log-spaced
            points in [1e-6, 0.5]
        window: Upper end of the small-t range used for the monotonicity check

    Raises:
        DomainError: If any t lies outside (0, 0.5]
    """
    t = default_tail_grid() if t_grid is None else np.array(t_grid, dtype=float, ndmin=1)
    if t.size == 0 or np.any(~((t > 0) & (t <= TAIL_T_MAX))):
        raise DomainError("tail curve needs every t in (0, 0.5]")
    values = _tail_term(p.alpha1, p.alpha2, t) + _tail_term(p.alpha2, p.alpha1, t)
    verdict = tail_verdict(t, values, window=window)
    logging.debug(f"TwoComponent // tail curve {p}: lambda({t.min():.3g})={values[np.argmin(t)]:.3g}, verdict={verdict}")
    return TailCurve(t=t, values=values, verdict=verdict, limit=0.0 if verdict == "zero" else None)


def fit_margin_gpds(data: LossSample) -> tuple[GpdFit, GpdFit]:
    return fit_gpd_mle(data.x1), fit_gpd_mle(data.x2)


def tc_fit_margins(data: LossSample, fits: tuple[GpdFit, GpdFit] | None = None) -> TwoComponentParams:
    """alpha_i = 1 / xi_i from GPD fits of each margin.

    Args:
        data: Loss pairs
        fits: Margin fits already computed for data (refitted when None)

    Raises:
        FitError: If a fitted shape is not positive
    """
    if fits is None:
        fits = fit_margin_gpds(data)
    for i, fit in enumerate(fits, start=1):
        if not fit.params.xi > 0:
            raise FitError(f"Two-component copula: margin {i} has xi_hat <= 0 (xi_hat={fit.params.xi:.6g})")
    return TwoComponentParams(alpha1=1.0 / fits[0].params.xi, alpha2=1.0 / fits[1].params.xi)


def tc_fit_pseudo_likelihood(
    ps: PseudoSample, start: TwoComponentParams | None = None, allow_boundary: bool = False
) -> TwoComponentParams:
    """Maximise sum log c(u_i, v_i) over [0.05, 100]^2.

    Nelder-Mead in log-parameter space, restarted from (1, 1), the optional
    start (e.g. a margin-based estimate) and (5, 5); the best run wins.

    With allow_boundary an optimum on the box edge is returned instead of
    raising; an edge value is still a valid member of the family. The
    goodness-of-fit test fits this way in step 2 and in every bootstrap refit.

    Raises:
        DegenerateSampleError: If n < 10
        FitError: If the optimum sits on the search-box boundary (unless
            allow_boundary) or the likelihood is not finite
    """
    if ps.n < 10:
        raise DegenerateSampleError(f"pseudo-likelihood fit needs n >= 10, got {ps.n}")
    u, v = ps.u1, ps.u2
    lo, hi = np.log(FIT_ALPHA_MIN), np.log(FIT_ALPHA_MAX)

    def negloglik(theta: np.ndarray) -> float:
        a1, a2 = np.exp(theta)
        value = -float(np.sum(_log_density(a1, a2, u, v)))
        return value if np.isfinite(value) else np.inf

    starts = [(1.0, 1.0)]
    if start is not None:
        starts.append((start.alpha1, start.alpha2))
    starts.append((5.0, 5.0))

    best = None
    for a in starts:
        x0 = np.clip(np.log(np.asarray(a, dtype=float)), lo, hi)
        res = optimize.minimize(
            negloglik, x0, method="Nelder-Mead", bounds=[(lo, hi), (lo, hi)],
            options={"xatol": 1e-6, "fatol": 1e-6, "maxiter": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res

    if not np.isfinite(best.fun):
        raise FitError("Two-component copula: pseudo-likelihood is not finite")
    a1, a2 = np.exp(np.clip(best.x, lo, hi))
    if np.any(np.abs(best.x - lo) < 1e-4) or np.any(np.abs(best.x - hi) < 1e-4):
        message = (
            f"Two-component copula: pseudo-likelihood optimum on the search boundary "
            f"(alpha=({a1:.4g}, {a2:.4g}), box [{FIT_ALPHA_MIN}, {FIT_ALPHA_MAX}])"
        )
        if not allow_boundary:
            raise FitError(message)
        logging.debug(f"TwoComponent // {message}; keeping it")
    return TwoComponentParams(alpha1=float(a1), alpha2=float(a2))


class TwoComponentCopula(Copula):
    name = "two-component"

    def __init__(self, params: TwoComponentParams, cdf_method: str = "laguerre"):
        self.p = params
        self.cdf_method = cdf_method

    @property
    def params(self) -> dict[str, float]:
        return {"alpha1": self.p.alpha1, "alpha2": self.p.alpha2}

    def cdf(self, u, v):
        return tc_cdf(self.p, u, v, method=self.cdf_method)

    def density(self, u, v):
        return tc_density(self.p, u, v)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return tc_sample_uniform(self.p, n, rng)

    def lambda_u(self) -> TailCurve:
        return tc_lambda_u_curve(self.p)

    @classmethod
    def fit_pseudo(
        cls, ps, start: TwoComponentParams | None = None, allow_boundary: bool = False
    ) -> "TwoComponentCopula":
        return cls(tc_fit_pseudo_likelihood(ps, start=start, allow_boundary=allow_boundary))

    @classmethod
    def fit_margins(cls, data: LossSample, fits: tuple[GpdFit, GpdFit] | None = None) -> "TwoComponentCopula":
        return cls(tc_fit_margins(data, fits))
