"""Nonparametric machinery: samples, pseudo-observations, the empirical
copula, Kendall's tau and the Cramer-von Mises statistic."""

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.stats import rankdata

from copula_app.errors import DegenerateSampleError, DomainError

# Rows of query points evaluated per block in empirical_copula.
_CHUNK = 1024


def _as_pair_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"expected an (n, 2) array of pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("pairs must be finite")
    return arr


@dataclass(frozen=True)
class LossSample:
    """n paired loss observations as an (n, 2) array."""
    data: np.ndarray

    def __post_init__(self):
        arr = _as_pair_array(self.data)
        if arr.shape[0] < 1:
            raise DegenerateSampleError("a loss sample needs at least one pair")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def x1(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def x2(self) -> np.ndarray:
        return self.data[:, 1]


@dataclass(frozen=True)
class PseudoSample:
    """n paired pseudo-observations on (0, 1)^2."""
    data: np.ndarray

    def __post_init__(self):
        arr = _as_pair_array(self.data)
        if arr.shape[0] < 1:
            raise DegenerateSampleError("a pseudo-sample needs at least one pair")
        if np.any(arr <= 0) or np.any(arr >= 1):
            raise DomainError("pseudo-observations must lie in the open unit square")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def u1(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def u2(self) -> np.ndarray:
        return self.data[:, 1]


def _pairs_of(s) -> np.ndarray:
    if isinstance(s, (LossSample, PseudoSample)):
        return s.data
    return _as_pair_array(s)


def pseudo_observations(s) -> PseudoSample:
    """Scaled ranks rank / (n + 1), ties resolved to the maximum rank.

    Accepts a LossSample, a PseudoSample or an (n, 2) array.
    """
    pairs = _pairs_of(s)
    n = pairs.shape[0]
    ranks = np.column_stack([rankdata(pairs[:, j], method="max") for j in range(2)])
    return PseudoSample(ranks / (n + 1.0))


def empirical_copula(ps: PseudoSample, v1, v2):
    """C_n(v1, v2) = (1/n) * #{i : u1_i <= v1, u2_i <= v2}."""
    v1, v2 = np.broadcast_arrays(np.asarray(v1, dtype=float), np.asarray(v2, dtype=float))
    shape = v1.shape
    q1 = v1.ravel()
    q2 = v2.ravel()
    u1 = ps.u1[None, :]
    u2 = ps.u2[None, :]
    out = np.empty(q1.shape)
    for start in range(0, q1.size, _CHUNK):
        block = slice(start, start + _CHUNK)
        hits = (u1 <= q1[block, None]) & (u2 <= q2[block, None])
        out[block] = hits.mean(axis=1)
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def _tied_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True, axis=0)
    counts = counts.astype(np.int64)
    return int(np.sum(counts * (counts - 1) // 2))


def _count_inversions(values: list) -> int:
    """Pairs i < j with values[i] > values[j], counted by a bottom-up merge sort."""
    n = len(values)
    src = list(values)
    dst = [None] * n
    inversions = 0
    width = 1
    while width < n:
        for left in range(0, n, 2 * width):
            mid = min(left + width, n)
            end = min(left + 2 * width, n)
            i, j, k = left, mid, left
            while i < mid and j < end:
                if src[j] < src[i]:
                    dst[k] = src[j]
                    inversions += mid - i
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            dst[k:k + (mid - i)] = src[i:mid]
            k += mid - i
            dst[k:k + (end - j)] = src[j:end]
        src, dst = dst, src
        width *= 2
    return inversions


def _check_tau_input(s) -> np.ndarray:
    pairs = _pairs_of(s)
    if pairs.shape[0] < 2:
        raise DegenerateSampleError("Kendall's tau needs at least two pairs")
    if np.all(pairs[:, 0] == pairs[0, 0]) or np.all(pairs[:, 1] == pairs[0, 1]):
        raise DegenerateSampleError("Kendall's tau is undefined for a constant coordinate")
    return pairs


def kendall_tau(s) -> float:
    """Sample Kendall's tau-a in O(n log n).

    Sorting by (x1, x2) turns every discordant pair into an inversion of the
    x2 sequence; tied pairs add nothing to the numerator and the denominator
    stays n(n-1)/2.
    """
    pairs = _check_tau_input(s)
    n = pairs.shape[0]
    x, y = pairs[:, 0], pairs[:, 1]
    order = np.lexsort((y, x))
    discordant = _count_inversions(y[order].tolist())

    n0 = n * (n - 1) // 2
    ties_x = _tied_pairs(x)
    ties_y = _tied_pairs(y)
    ties_xy = _tied_pairs(pairs)
    return (n0 - ties_x - ties_y + ties_xy - 2 * discordant) / n0


def kendall_tau_brute(s) -> float:
    """O(n^2) reference for kendall_tau."""
    pairs = _check_tau_input(s)
    n = pairs.shape[0]
    x, y = pairs[:, 0], pairs[:, 1]
    concordance = np.sign(x[:, None] - x[None, :]) * np.sign(y[:, None] - y[None, :])
    return float(np.triu(concordance, k=1).sum()) / (n * (n - 1) // 2)


def cvm_statistic(ps: PseudoSample, fitted) -> float:
    """Sum over sample points of (C_n(u_i) - C_fit(u_i))^2.

    Args:
        ps: Pseudo-observations
        fitted: A copula CDF callable (u, v) -> C(u, v), or an object with .cdf
    """
    evaluate = fitted.cdf if hasattr(fitted, "cdf") else fitted
    empirical = empirical_copula(ps, ps.u1, ps.u2)
    parametric = np.asarray(evaluate(ps.u1, ps.u2), dtype=float)
    return float(np.sum((empirical - parametric) ** 2))


def copula_surfaces(ps: PseudoSample, copulas: Mapping, grid_n: int):
    """Empirical and fitted copulas on the interior grid k / (grid_n + 1).

    Returns:
        (u, v, surfaces) where u and v are flattened grid coordinates and
        surfaces maps "empirical" and each copula name to its values
    """
    if grid_n < 2:
        raise DomainError(f"grid_n must be >= 2, got {grid_n}")
    axis = np.arange(1, grid_n + 1) / (grid_n + 1.0)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    u, v = uu.ravel(), vv.ravel()
    surfaces = {"empirical": empirical_copula(ps, u, v)}
    for name, copula in copulas.items():
        surfaces[name] = np.asarray(copula.cdf(u, v), dtype=float)
    return u, v, surfaces
