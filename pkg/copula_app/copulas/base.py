"""Base class and shared helpers for bivariate copula families."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from copula_app.errors import DomainError

CopulaEvaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Largest double below 1; samplers clip to (0, 1) with it.
ONE_MINUS = np.nextafter(1.0, 0.0)
TINY = np.finfo(float).tiny


def broadcast_uv(u, v) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Flatten broadcast (u, v) and return the original shape.

    Raises:
        DomainError: If a coordinate is NaN or outside [0, 1]
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any(~((u >= 0) & (u <= 1))) or np.any(~((v >= 0) & (v <= 1))):
        raise DomainError("copula arguments must lie in [0, 1]")
    return u.ravel(), v.ravel(), u.shape


def restore_shape(values: np.ndarray, shape: tuple):
    values = np.asarray(values, dtype=float).reshape(shape)
    return float(values) if values.ndim == 0 else values


def clip_open_unit(values: np.ndarray) -> np.ndarray:
    return np.clip(values, TINY, ONE_MINUS)


@dataclass(frozen=True)
class TailCurve:
    """Upper-tail-dependence curve evaluated before the limit.

    Attributes:
        t: Grid of tail probabilities in (0, 0.5]
        values: lambda_U(t) at each grid point
        verdict: "zero" or "undetermined"
        limit: 0.0 for a "zero" verdict, otherwise None
    """
    t: np.ndarray
    values: np.ndarray
    verdict: str
    limit: float | None


class Copula(ABC):
    """A fitted or fully parameterised bivariate copula.

    Every family exposes its CDF, a sampler for uniform pairs, its upper tail
    dependence, and a fitter from pseudo-observations used inside the
    parametric bootstrap.
    """

    name: str = "base"

    @property
    @abstractmethod
    def params(self) -> dict[str, float]:
        """Parameter name -> value, in report order."""

    @abstractmethod
    def cdf(self, u, v):
        """C(u, v), broadcast over u and v."""

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n pairs on (0, 1)^2 as an (n, 2) array."""

    @abstractmethod
    def lambda_u(self) -> float | TailCurve:
        """Upper tail dependence coefficient, or a curve when no closed form exists."""

    @classmethod
    @abstractmethod
    def fit_pseudo(cls, ps) -> "Copula":
        """Fit from a PseudoSample.

        Raises:
            FitError: If the estimate violates the family's validity rule
        """

    def describe(self) -> str:
        values = ", ".join(f"{k}={v:.6g}" for k, v in self.params.items())
        return f"{self.name}({values})"
