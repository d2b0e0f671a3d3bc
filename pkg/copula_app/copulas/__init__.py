"""Copula family registry."""

from copula_app.copulas.base import Copula, TailCurve
from copula_app.copulas.gaussian import GaussianCopula
from copula_app.copulas.gumbel import GumbelCopula
from copula_app.copulas.two_component import TwoComponentCopula


# Families that can be fitted and tested, keyed by their CLI/config name
COPULAS = {
    "gaussian": GaussianCopula,
    "gumbel": GumbelCopula,
    "two-component": TwoComponentCopula,
}


def get_copula(name: str) -> type[Copula]:
    """Get a copula family class by name.

    Raises:
        ValueError: If the family name is not registered
    """
    if name not in COPULAS:
        available = ", ".join(COPULAS.keys())
        raise ValueError(f"Unknown copula family '{name}'. Available families: {available}")
    return COPULAS[name]


__all__ = [
    "Copula",
    "TailCurve",
    "GaussianCopula",
    "GumbelCopula",
    "TwoComponentCopula",
    "get_copula",
    "COPULAS",
]
