"""Configuration for census builds and queries."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_CACHE_DIR,
    CONF_CACHE_FILE,
    CONF_INCLUDE_DIAGONAL,
    CONF_MODEL_FILE,
    CONF_MODEL_SOURCE,
    CONF_NORM_KIND,
    CONF_OUTPUT_FORMAT,
    CONF_PAIR_K,
    CONF_PRECISION,
    CONF_REPRESENTATION,
    CONF_SAFETY_MARGIN,
    CONF_SHARDS,
    CONF_STAMP,
    CONF_WORD_LENGTH_BOUND,
    DEFAULT_CACHE_DIR,
    DEFAULT_PAIR_K,
    DEFAULT_PRECISION,
    DEFAULT_SAFETY_MARGIN,
    DEFAULT_SHARDS,
    DEFAULT_WORD_LENGTH_BOUND,
    ENV_CACHE_DIR,
    MIN_PRECISION,
    MODEL_DEFAULT,
    MODEL_FILE,
    MODEL_SOURCES,
    NORM_KINDS,
    NORM_SUM,
    OUTPUT_CSV,
    OUTPUT_FORMATS,
    PRESET_BOLZA,
)
from .exceptions import ConfigError

_LOGGER = logging.getLogger(__name__)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_REPRESENTATION, default=PRESET_BOLZA): vol.All(str, vol.Length(min=1)),
        vol.Optional(CONF_PRECISION, default=DEFAULT_PRECISION): vol.All(
            vol.Coerce(int), vol.Range(min=MIN_PRECISION)
        ),
        vol.Optional(CONF_WORD_LENGTH_BOUND, default=DEFAULT_WORD_LENGTH_BOUND): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_SHARDS, default=DEFAULT_SHARDS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_CACHE_DIR, default=str(DEFAULT_CACHE_DIR)): vol.Coerce(str),
        vol.Optional(CONF_CACHE_FILE): vol.Any(None, vol.Coerce(str)),
        vol.Optional(CONF_MODEL_SOURCE, default=MODEL_DEFAULT): vol.In(MODEL_SOURCES),
        vol.Optional(CONF_MODEL_FILE): vol.Any(None, vol.Coerce(str)),
        vol.Optional(CONF_OUTPUT_FORMAT, default=OUTPUT_CSV): vol.In(OUTPUT_FORMATS),
        vol.Optional(CONF_INCLUDE_DIAGONAL, default=True): bool,
        vol.Optional(CONF_NORM_KIND, default=NORM_SUM): vol.In(NORM_KINDS),
        vol.Optional(CONF_SAFETY_MARGIN, default=DEFAULT_SAFETY_MARGIN): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_PAIR_K, default=DEFAULT_PAIR_K): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        vol.Optional(CONF_STAMP, default=False): bool,
    }
)


@dataclass(frozen=True)
class Config:
    """Validated settings shared by every command."""

    representation: str = PRESET_BOLZA
    precision: int = DEFAULT_PRECISION
    word_length_bound: int = DEFAULT_WORD_LENGTH_BOUND
    shards: int = DEFAULT_SHARDS
    cache_dir: Path = DEFAULT_CACHE_DIR
    cache_file: Path | None = None
    model_source: str = MODEL_DEFAULT
    model_file: Path | None = None
    output_format: str = OUTPUT_CSV
    include_diagonal: bool = True
    norm_kind: str = NORM_SUM
    safety_margin: float = DEFAULT_SAFETY_MARGIN
    pair_k: float = DEFAULT_PAIR_K
    stamp: bool = False

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Config:
        """Create from a plain mapping, validated against CONFIG_SCHEMA.

        Raises:
            ConfigError: If a value is missing, unknown or out of range
        """
        try:
            values = CONFIG_SCHEMA(dict(data))
        except vol.Invalid as err:
            raise ConfigError(f"Invalid configuration: {err}") from err

        if values[CONF_MODEL_SOURCE] == MODEL_FILE and not values.get(CONF_MODEL_FILE):
            raise ConfigError("Model source 'file' needs a model_file")

        return cls(
            representation=values[CONF_REPRESENTATION],
            precision=values[CONF_PRECISION],
            word_length_bound=values[CONF_WORD_LENGTH_BOUND],
            shards=values[CONF_SHARDS],
            cache_dir=Path(values[CONF_CACHE_DIR]).expanduser(),
            cache_file=_optional_path(values.get(CONF_CACHE_FILE)),
            model_source=values[CONF_MODEL_SOURCE],
            model_file=_optional_path(values.get(CONF_MODEL_FILE)),
            output_format=values[CONF_OUTPUT_FORMAT],
            include_diagonal=values[CONF_INCLUDE_DIAGONAL],
            norm_kind=values[CONF_NORM_KIND],
            safety_margin=values[CONF_SAFETY_MARGIN],
            pair_k=values[CONF_PAIR_K],
            stamp=values[CONF_STAMP],
        )


def _optional_path(value: str | None) -> Path | None:
    return None if value is None else Path(value).expanduser()


def load_config(
    path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> Config:
    """Layer defaults, a JSON config file, the environment and explicit overrides.

    Args:
        path: Optional JSON config file
        overrides: Values from the command line; None entries are ignored
        environ: Environment, defaults to os.environ

    Raises:
        ConfigError: If the file is unreadable or the merged values are invalid
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as err:
            _LOGGER.error("Cannot read config file %s: %s", path, err)
            raise ConfigError(f"Cannot read config file {path}: {err}") from err
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        data.update(loaded)

    environ = os.environ if environ is None else environ
    if environ.get(ENV_CACHE_DIR):
        data[CONF_CACHE_DIR] = environ[ENV_CACHE_DIR]

    if overrides:
        data.update({key: value for key, value in overrides.items() if value is not None})

    config = Config.from_dict(data)
    _LOGGER.debug("Using configuration %s", config)
    return config
