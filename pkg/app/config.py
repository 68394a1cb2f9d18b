import json
import logging
import os
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

load_dotenv()

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.json"

# Environment variables that override individual config keys.
ENV_OVERRIDES = {
    "SUMPOLY_LOG_LEVEL": "logging.level",
    "SUMPOLY_WORKERS": "experiment.workers",
    "SUMPOLY_D_CAP": "solver.d_cap",
}


class ConfigLoader:
    """
    Loads and provides access to the configuration from config.json.
    Supports nested access via dot-separated keys.
    """

    def __init__(self, config_path: str = None):
        config_path = config_path or os.getenv("SUMPOLY_CONFIG") or str(DEFAULT_CONFIG_PATH)
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        with open(config_file, "r", encoding="utf-8") as f:
            self._config = json.load(f)

        for env_name, key_path in ENV_OVERRIDES.items():
            value = os.getenv(env_name)
            if value is not None:
                self.set(key_path, _coerce(value))

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Access nested config using dot notation, e.g. "solver.d_cap".
        """
        keys = key_path.split(".")
        value = self._config
        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key_path: str, value: Any):
        keys = key_path.split(".")
        node = self._config
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value

    @property
    def raw(self) -> dict:
        return self._config


def _coerce(value: str) -> Any:
    try:
        return int(value)
    except ValueError:
        return value


def configure_logging(level: str = None):
    """Set the root log level once for the command-line entry point."""
    level = (level or config.get("logging.level", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# Singleton config instance
config = ConfigLoader()
