"""
Shared fixtures for functional tests.

These run full experiments at the `ci` scale (minutes) and, with
ARNOLD_WAVEGUIDE_PAPER_SCALE=1, at the `paper` scale (hours).
"""

import os

import pytest

if os.getenv("CI") == "true":
    pytest.skip("Skipping all tests (experiment runs are too slow for CI)", allow_module_level=True)

from arnold_waveguide.config import _load_json, _load_settings, get_config_dir
from arnold_waveguide.pipeline import resolve_config


@pytest.fixture(autouse=True)
def builtin_settings(monkeypatch):
    """Ignore any local config/settings.json."""
    monkeypatch.setenv("ARNOLD_WAVEGUIDE_CONFIG_DIR", "/nonexistent-arnold-waveguide-config")
    for cache in (_load_json, _load_settings, get_config_dir):
        cache.cache_clear()
    yield
    for cache in (_load_json, _load_settings, get_config_dir):
        cache.cache_clear()


@pytest.fixture
def experiment(tmp_path):
    """Factory: resolved config for a run, written into a per-test folder."""

    def factory(run: str, scale: str = "ci", **sections):
        data = {"run": run, "scale": scale, "output_dir": str(tmp_path / run), **sections}
        return resolve_config(data)

    return factory
