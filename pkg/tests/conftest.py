import numpy as np
import pytest

from copula_app.copulas.two_component import ModelParams, TwoComponentParams, tc_sample
from copula_app.rng import stream
from tailcopula_config import Config

REFERENCE_MODEL = ModelParams(TwoComponentParams(alpha1=3.387732, alpha2=1.181292), sigma1=1.0, sigma2=0.9)


@pytest.fixture(autouse=True)
def reset_config():
    Config.reset()
    yield
    Config.reset()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def reference_sample():
    """1000 pairs from the reference loss model."""
    return tc_sample(REFERENCE_MODEL, 1000, stream(20240607, 0))


@pytest.fixture()
def reference_model() -> ModelParams:
    return REFERENCE_MODEL
