"""Study settings: the Lua config table plus command-line overrides."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from copula_app.copulas import COPULAS
from copula_app.copulas.two_component import ModelParams, TwoComponentParams
from copula_app.errors import ConfigError, DomainError
from copula_app.gof import GofConfig, TcEstimator
from copula_app.rng import SEED_MASK
from copula_app.study import DEFAULT_FAMILIES, family_configs
from tailcopula_config import Config

# Generating setup of the reference simulation study.
DEFAULT_MODEL = {"alpha1": 3.387732, "alpha2": 1.181292, "sigma1": 1.0, "sigma2": 0.9}
DEFAULT_SEED = 20240607

_TOP_KEYS = {
    "model", "n", "seed", "bootstrap_k", "beta", "families", "tc_estimator",
    "threads", "external_p_values", "output",
}
_OUTPUT_KEYS = {"data", "report", "histogram", "grid", "curve", "surfaces"}


@dataclass(frozen=True)
class OutputPaths:
    data: Path | None = None
    report: Path | None = None
    histogram: Path | None = None
    grid: Path | None = None
    curve: Path | None = None
    surfaces: Path | None = None


@dataclass(frozen=True)
class StudySettings:
    model: ModelParams
    n: int = 1000
    seed: int = DEFAULT_SEED
    bootstrap_k: int = 1000
    beta: float = 0.05
    families: tuple[str, ...] = DEFAULT_FAMILIES
    tc_estimator: TcEstimator = TcEstimator.PSEUDO_LIKELIHOOD
    threads: int = 1
    external_p_values: dict[str, float] = field(default_factory=dict)
    output: OutputPaths = OutputPaths()

    def gof_configs(self) -> list[GofConfig]:
        return family_configs(
            self.families, self.seed, bootstrap_k=self.bootstrap_k,
            tc_estimator=self.tc_estimator, threads=self.threads,
        )


def _as_int(key: str, value: Any, minimum: int, maximum: int | None = None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    if value < minimum or (maximum is not None and value > maximum):
        bound = f">= {minimum}" if maximum is None else f"in [{minimum}, {maximum}]"
        raise ConfigError(f"'{key}' must be {bound}, got {value}")
    return value


def _as_float(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def _as_list(key: str, value: Any) -> list:
    # Lua turns an empty table into {} rather than a list.
    if value == {}:
        return []
    if not isinstance(value, list):
        raise ConfigError(f"'{key}' must be a list, got {value!r}")
    return value


def _check_keys(where: str, table: Mapping, allowed: set[str]) -> None:
    if not isinstance(table, Mapping):
        raise ConfigError(f"'{where}' must be a table, got {table!r}")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")


def build_settings(table: Mapping, overrides: Mapping[str, Any] | None = None) -> StudySettings:
    """Validate a config table, apply non-None overrides and build StudySettings.

    Overrides use the top-level key names (n, seed, bootstrap_k, beta,
    families, tc_estimator, threads) plus model.<name> and output.<name>.

    Raises:
        ConfigError: On unknown keys, wrong types or out-of-range values
    """
    table = dict(table)
    _check_keys("config", table, _TOP_KEYS)
    model = dict(DEFAULT_MODEL)
    model_table = table.get("model", {})
    _check_keys("model", model_table, set(DEFAULT_MODEL))
    model.update(model_table)
    output = dict(table.get("output", {}))
    _check_keys("output", output, _OUTPUT_KEYS)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key.startswith("model."):
            name = key.split(".", 1)[1]
            _check_keys("model", {name: value}, set(DEFAULT_MODEL))
            model[name] = value
        elif key.startswith("output."):
            name = key.split(".", 1)[1]
            _check_keys("output", {name: value}, _OUTPUT_KEYS)
            output[name] = value
        elif key in _TOP_KEYS - {"model", "output"}:
            table[key] = value
        else:
            raise ConfigError(f"unknown override '{key}'")

    try:
        model_params = ModelParams(
            tc=TwoComponentParams(
                alpha1=_as_float("model.alpha1", model["alpha1"]),
                alpha2=_as_float("model.alpha2", model["alpha2"]),
            ),
            sigma1=_as_float("model.sigma1", model["sigma1"]),
            sigma2=_as_float("model.sigma2", model["sigma2"]),
        )
    except DomainError as e:
        raise ConfigError(str(e)) from None

    families = tuple(_as_list("families", table.get("families", list(DEFAULT_FAMILIES))))
    for family in families:
        if family not in COPULAS:
            raise ConfigError(f"unknown family '{family}' (available: {', '.join(COPULAS)})")

    beta = _as_float("beta", table.get("beta", 0.05))
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"'beta' must lie in (0, 1), got {beta}")

    try:
        tc_estimator = TcEstimator(table.get("tc_estimator", TcEstimator.PSEUDO_LIKELIHOOD))
    except ValueError:
        raise ConfigError(f"unknown tc_estimator '{table.get('tc_estimator')}'") from None

    external = table.get("external_p_values", {})
    if not isinstance(external, Mapping):
        raise ConfigError("'external_p_values' must be a table of name = p-value")
    external_p = {}
    for name, p in external.items():
        p = _as_float(f"external_p_values.{name}", p)
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"external p-value '{name}' outside [0, 1]: {p}")
        external_p[str(name)] = p

    for name, path in output.items():
        if not isinstance(path, (str, Path)):
            raise ConfigError(f"'output.{name}' must be a path string, got {path!r}")

    return StudySettings(
        model=model_params,
        n=_as_int("n", table.get("n", 1000), 1),
        seed=_as_int("seed", table.get("seed", DEFAULT_SEED), 0, SEED_MASK),
        bootstrap_k=_as_int("bootstrap_k", table.get("bootstrap_k", 1000), 1),
        beta=beta,
        families=families,
        tc_estimator=tc_estimator,
        threads=_as_int("threads", table.get("threads", 1), 1),
        external_p_values=external_p,
        output=OutputPaths(**{name: Path(path) for name, path in output.items()}),
    )


def load_settings(config_path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> StudySettings:
    """Load the Lua config (if given) through the shared Config singleton.

    Raises:
        ConfigError: If the file is missing, fails to execute or is invalid
    """
    table: dict = {}
    if config_path is not None:
        try:
            Config.load(config_path)
        except FileNotFoundError as e:
            raise ConfigError(str(e)) from None
        except Exception as e:
            raise ConfigError(f"cannot read config {config_path}: {e}") from e
        table = Config.as_dict()
        logging.info(f"Settings // loaded {sorted(table)} from {Config.loaded_path}")
    return build_settings(table, overrides)
