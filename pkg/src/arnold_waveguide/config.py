"""
Centralized configuration manager for the waveguide simulator.

Loads tool-wide settings from JSON files in the config/ directory. Experiment files
(one per run) are validated separately, see `arnold_waveguide.pipeline.load_config`.
"""

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

load_dotenv()

SETTINGS_FILE_NAME = "settings.json"
EXPERIMENTS_DIR_NAME = "experiments"

# Frozen classification thresholds, shared by the acceptance suite
DEFAULT_CLASSIFICATION: dict[str, float | int] = {
    "inside_tolerance": 0.2,
    "pair_ratio": 0.1,
    "band_fraction": 0.5,
    "bottom_levels": 5,
    "grouping_margin": 0.02,
}

DEFAULT_TOLERANCES: dict[str, float] = {
    "hermiticity": 1e-12,
    "unitarity": 1e-8,
    "qe_modulus": 1e-6,
    "resonance_detuning": 0.01,
    "commensurability": 1e-9,
    "leakage_warning": 0.01,
    "leakage_abort": 0.05,
    "collision": 1e-10,
}

DEFAULT_LOCALIZATION: dict[str, float] = {
    "window_periods": 100,
}

# Scale presets: 'paper' is the full n0 = m0 = 400 parameter set, 'ci' keeps the same
# 7:9 driving around a lower resonance so runs finish on a desk machine
DEFAULT_SCALES: dict[str, dict[str, Any]] = {
    "paper": {
        "omega_target": 400.0,
        "driving_frequencies": [350.0, 450.0],
        "r_max": 32,
        "p_window": 16,
        "q_window": 14,
        "steps_per_period": 4096,
        "n_total": 600,
        "record_every": 1,
        "ensemble_count": 2000,
    },
    "ci": {
        "omega_target": 100.6,
        "driving_frequencies": None,
        "r_max": 16,
        "p_window": 12,
        "q_window": 10,
        "steps_per_period": 1024,
        "n_total": 600,
        "record_every": 1,
        "ensemble_count": 200,
    },
}


# Config JSON files are read once and cached for the lifetime of the process
def _config_dir_candidates() -> list[Path]:
    """
    Candidate configuration directories, in resolution order.

    Returns:
        List of candidate paths, most specific first.
    """
    # Source checkout: src/arnold_waveguide/config.py -> repository root
    return [Path(__file__).resolve().parents[2] / "config", Path("config")]


@lru_cache
def get_config_dir() -> Path:
    """
    Get the configuration directory path.

    Resolution order, first existing directory wins:
    1. `ARNOLD_WAVEGUIDE_CONFIG_DIR`, returned as given even when it does not exist, so an
       explicit override is never silently overruled by a fallback
    2. `config` at the repository root, so running from source works from any CWD
    3. `config` relative to the current working directory

    Returns:
        Path to the configuration directory
    """
    env_dir = os.getenv("ARNOLD_WAVEGUIDE_CONFIG_DIR")
    if env_dir:
        return Path(env_dir)

    for candidate in _config_dir_candidates():
        if candidate.is_dir():
            return candidate

    return Path("config")


@lru_cache(maxsize=None)
def _load_json(filename: str) -> dict[str, Any]:
    """
    Load a JSON config file with caching.

    Args:
        filename: Name of the JSON configuration file, relative to the config directory

    Returns:
        Dictionary containing the parsed JSON data

    Raises:
        FileNotFoundError: If the configuration file does not exist
        json.JSONDecodeError: If the file contains invalid JSON
    """
    config_dir = get_config_dir()
    file_path = config_dir / filename
    if not file_path.exists():
        sample = config_dir / f"{Path(filename).stem}.sample.json"
        hint = f"Copy '{sample}' to '{filename}'" if sample.exists() else f"Create '{filename}' in that folder"
        raise FileNotFoundError(f"Configuration file not found: {file_path.resolve()} (config directory: {config_dir.resolve()}). {hint}, or set ARNOLD_WAVEGUIDE_CONFIG_DIR to the folder that holds it.")
    try:
        with open(file_path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise json.JSONDecodeError(f"Invalid JSON in {file_path}: {e}", e.doc, e.pos) from e


@lru_cache
def _load_settings() -> dict[str, Any]:
    """
    Load settings.json, falling back to built-in defaults when it is absent.

    Unlike experiment files, the settings file is optional: every key has a default.

    Returns:
        Dictionary containing the settings (possibly empty)
    """
    from arnold_waveguide.init import logger

    try:
        settings = _load_json(SETTINGS_FILE_NAME)
    except FileNotFoundError:
        logger.debug("No %s in %s, using built-in defaults", SETTINGS_FILE_NAME, get_config_dir())
        return {}
    if not isinstance(settings, dict):
        raise ValueError(f"{SETTINGS_FILE_NAME} must contain a JSON object")
    return settings


def _merged(defaults: dict[str, Any], overrides: dict[str, Any] | None) -> dict[str, Any]:
    """Shallow merge of a settings section over its defaults."""
    result = dict(defaults)
    result.update(overrides or {})
    return result


class Config:
    """Centralized configuration manager - thin wrapper around cached functions."""

    @property
    def output_dir(self) -> Path:
        """Default directory for run artifacts when neither the CLI nor the experiment sets one."""
        return Path(_load_settings().get("output_dir", "results"))

    @property
    def max_workers(self) -> int:
        """Process count for classical ensembles; 1 runs trajectories in-process."""
        return max(1, int(_load_settings().get("max_workers", os.cpu_count() or 1)))

    @property
    def read_only(self) -> bool:
        """When True, hide all MCP tools that write artifacts."""
        return bool(_load_settings().get("read_only", False))

    @property
    def excluded_tags(self) -> set[str]:
        """Set of MCP tool tags to hide."""
        tags = _load_settings().get("excluded_tags")
        if tags is None:
            return set()
        return set(tags)

    @property
    def tolerances(self) -> dict[str, float]:
        """Numerical tolerances, defaults overlaid with settings."""
        return _merged(DEFAULT_TOLERANCES, _load_settings().get("tolerances"))

    @property
    def classification(self) -> dict[str, Any]:
        """Separatrix classification thresholds."""
        return _merged(DEFAULT_CLASSIFICATION, _load_settings().get("classification"))

    @property
    def localization(self) -> dict[str, float]:
        """Dynamical-localization detector settings."""
        return _merged(DEFAULT_LOCALIZATION, _load_settings().get("localization"))

    @property
    def experiments_dir(self) -> Path:
        """Folder holding sample experiment files."""
        return get_config_dir() / EXPERIMENTS_DIR_NAME

    def get_scale(self, name: str) -> dict[str, Any]:
        """
        Return a scale preset, defaults overlaid with settings.

        Args:
            name: Preset name, 'paper' or 'ci'

        Raises:
            KeyError: If the preset is unknown
        """
        overrides = _load_settings().get("scales", {})
        if name not in DEFAULT_SCALES and name not in overrides:
            raise KeyError(f"Unknown scale '{name}'. Available: {sorted(set(DEFAULT_SCALES) | set(overrides))}")
        return _merged(DEFAULT_SCALES.get(name, {}), overrides.get(name))

    @property
    def scale_names(self) -> list[str]:
        """All known scale presets."""
        return sorted(set(DEFAULT_SCALES) | set(_load_settings().get("scales", {})))


def get_tolerance(name: str, default: float | None = None) -> float:
    """
    Get a tolerance value from configuration.

    Args:
        name: Tolerance key
        default: Fallback when the key is neither configured nor built in

    Returns:
        Tolerance value
    """
    tolerances = get_config().tolerances
    if name in tolerances:
        return float(tolerances[name])
    if default is None:
        raise KeyError(f"Unknown tolerance '{name}'")
    return default


@lru_cache
def get_config() -> Config:
    """Get the singleton Config instance."""
    return Config()
