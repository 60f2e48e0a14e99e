"""Configuration management for polysurf."""

import json
from pathlib import Path
from typing import Any, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

CONFIG_FILENAME = "polysurf.json"


def get_config_dir() -> Path:
    """Get the configuration directory (the working directory)."""
    return Path.cwd()


class Settings(BaseSettings):
    """Numerical tolerances, budgets and experiment defaults."""

    model_config = SettingsConfigDict(
        env_prefix="POLYSURF_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Geometry
    geom_tolerance: float = Field(default=1e-9, gt=0)
    singular_tolerance: float = Field(default=1e-9, gt=0)  # vertex hit radius
    min_side_threshold: float = Field(default=1e-2, gt=0)

    # Holonomy / unfolding
    holonomy_cap: int = Field(default=4096, ge=1)
    lattice_bound: int = Field(default=1000, ge=1)

    # Flow budgets
    max_events: int = Field(default=1_000_000, ge=1)
    max_length: float = Field(default=1e6, gt=0)
    beam_max_pieces: int = Field(default=200_000, ge=1)

    # Experiments
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    escape_window: int = Field(default=100, ge=1)
    escape_factor: float = Field(default=0.5, gt=0)
    recurrent_fraction: float = Field(default=0.99, ge=0, le=1)

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> "Settings":
        """Load settings from config file and environment."""
        config_dir = get_config_dir()
        env_file = config_dir / ".env"

        config_file = config_path or config_dir / CONFIG_FILENAME
        config_data: dict[str, Any] = {}

        if config_file.exists():
            with open(config_file) as f:
                config_data = json.load(f)

        return cls(
            _env_file=env_file if env_file.exists() else None,  # type: ignore[call-arg]
            **config_data,
        )

    def save(self, config_path: Optional[Path] = None) -> None:
        """Save settings that differ from the defaults."""
        config_file = config_path or get_config_dir() / CONFIG_FILENAME
        defaults = type(self).model_construct()
        config_data = {
            name: value
            for name, value in self.model_dump().items()
            if getattr(defaults, name) != value
        }

        with open(config_file, "w") as f:
            json.dump(config_data, f, indent=2)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings.load()
    return _settings


def reload_settings() -> Settings:
    """Reload settings from disk."""
    global _settings
    _settings = Settings.load()
    return _settings


def override_settings(**changes: Any) -> Settings:
    """Replace individual fields of the global settings, ignoring None values."""
    global _settings
    current = get_settings()
    updates = {k: v for k, v in changes.items() if v is not None}
    _settings = current.model_copy(update=updates) if updates else current
    return _settings
