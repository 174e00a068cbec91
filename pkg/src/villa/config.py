"""Configuration file loading with defaults and flag precedence.

Settings come from three layers: built-in defaults, an optional TOML file,
and command-line flags. Flags override the file; the file overrides the
defaults. Secrets (API keys) are never read from config files, only from
the environment.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    k: int = 150
    t: float = 0.5
    k_a: int = 160
    k_c: int = 160
    t_level2: float | None = None
    chunk_size: int = 1000
    chunk_overlap: int = 100
    abstract_limit: int = 5000
    iterations: int = 5
    virus: str = "influenza A"
    query_mode: str = "full_prompt"
    jobs: int = 1

    def validate(self) -> "Config":
        for name in ("k", "k_a", "k_c", "iterations", "jobs", "chunk_size", "abstract_limit"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("t", "t_level2"):
            value = getattr(self, name)
            if value is None:
                continue
            if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 2.0:
                raise ConfigError(f"{name} must be in [0, 2], got {value!r}")
        if not isinstance(self.chunk_overlap, int) or not 0 <= self.chunk_overlap < self.chunk_size:
            raise ConfigError(
                f"chunk_overlap must satisfy 0 <= overlap < chunk_size,"
                f" got overlap={self.chunk_overlap!r} chunk_size={self.chunk_size!r}"
            )
        if self.query_mode not in ("full_prompt", "short"):
            raise ConfigError(f"query_mode must be 'full_prompt' or 'short', got {self.query_mode!r}")
        return self


_VALID_KEYS = tuple(f.name for f in fields(Config))


def load_config(path=None) -> Config:
    """Load a TOML config file over the defaults.

    Raises:
        ConfigError: unknown key (listing the valid ones) or out-of-range
            value.
    """
    config = Config()
    if path is None:
        return config.validate()
    with open(path, "rb") as handle:
        try:
            raw = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    for key, value in raw.items():
        if key not in _VALID_KEYS:
            raise ConfigError(
                f"{path}: unknown key {key!r}; valid keys: {', '.join(_VALID_KEYS)}"
            )
        setattr(config, key, value)
    return config.validate()


def apply_overrides(config: Config, **overrides) -> Config:
    """Apply non-None flag values on top of a config (flags beat the file)."""
    for key, value in overrides.items():
        if key not in _VALID_KEYS:
            raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(_VALID_KEYS)}")
        if value is not None:
            setattr(config, key, value)
    return config.validate()
