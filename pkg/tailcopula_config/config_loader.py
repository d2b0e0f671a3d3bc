"""Study configuration loader: a singleton over a Lua `config` table."""

import copy
import logging
from pathlib import Path
from typing import Optional
from lupa.lua54 import LuaRuntime


class ConfigSingleton:
    """Singleton holding the `config` table of one Lua study file.

    Usage:
        Config.load("config.lua")
        table = Config.as_dict()
    """

    _instance = None
    _config: Optional[dict] = None
    _loaded_path: Optional[Path] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @property
    def loaded_path(self) -> Optional[Path]:
        return self._loaded_path

    def load(self, config_path: str | Path) -> None:
        """Load a Lua study configuration file.

        The file must assign a global table named `config`.

        Args:
            config_path: Path to the .lua file

        Raises:
            FileNotFoundError: If the file does not exist
            ValueError: If the script does not define a `config` table

        Note:
            Loading the same path twice is a no-op; a different path replaces
            the current configuration.
        """
        config_path = Path(config_path)

        if self._loaded_path == config_path and self._config is not None:
            logging.debug(f"Config // Already loaded from {config_path}")
            return

        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        logging.info(f"Config // Loading {config_path}")
        self._config = self._execute(config_path.read_text(), source=str(config_path))
        self._loaded_path = config_path
        logging.debug(f"Config // Top-level keys: {sorted(self._config.keys())}")

    def _execute(self, script: str, source: str) -> dict:
        lua = LuaRuntime(unpack_returned_tuples=True)
        lua.execute(script)
        lua_config = lua.globals().config
        if lua_config is None:
            raise ValueError(f"{source} does not define a global 'config' table")
        table = self._lua_table_to_dict(lua_config)
        if not isinstance(table, dict):
            raise ValueError(f"{source}: 'config' must be a table with named keys")
        return table

    def as_dict(self) -> dict:
        """Deep copy of the whole configuration table."""
        self._require_loaded()
        return copy.deepcopy(self._config)

    def _require_loaded(self) -> None:
        if self._config is None:
            raise RuntimeError("Config not loaded. Call Config.load(path) first.")

    def _lua_table_to_dict(self, lua_table):
        """Recursively convert Lua tables to Python dicts/lists.

        Tables whose keys are exactly 1..n become lists; everything else
        becomes a dict. An empty table becomes an empty dict, so callers that
        expect a list must accept {} as well.
        """
        try:
            items = list(lua_table.items())
        except (AttributeError, TypeError):
            return lua_table

        if not items:
            return {}

        keys = [k for k, _ in items]
        if all(isinstance(k, int) for k in keys) and sorted(keys) == list(range(1, len(keys) + 1)):
            return [self._lua_table_to_dict(lua_table[i]) for i in range(1, len(keys) + 1)]

        return {key: self._lua_table_to_dict(value) for key, value in items}

    def reset(self) -> None:
        """Forget the loaded configuration (used by tests)."""
        self._config = None
        self._loaded_path = None


Config = ConfigSingleton()
