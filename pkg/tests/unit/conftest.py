"""
Shared fixtures for unit tests.
"""

import math

import pytest

from arnold_waveguide.config import _load_json, _load_settings, get_config_dir
from arnold_waveguide.models import DrivingField, ModelParams, commensurate_driving
from arnold_waveguide.physics.basis import Truncation


@pytest.fixture(autouse=True)
def clear_caches(monkeypatch):
    """Run every test on built-in settings, independent of a local config/settings.json."""
    monkeypatch.setenv("ARNOLD_WAVEGUIDE_CONFIG_DIR", "/nonexistent-arnold-waveguide-config")
    _load_json.cache_clear()
    _load_settings.cache_clear()
    get_config_dir.cache_clear()
    yield
    _load_json.cache_clear()
    _load_settings.cache_clear()
    get_config_dir.cache_clear()


@pytest.fixture
def make_params():
    """Factory for desk-scale parameters: n0 = m0 = 100, d = π, k = 0.1, 7:9 driving around ω_n0."""

    def factory(**overrides) -> ModelParams:
        k = overrides.get("k", 0.1)
        n0 = overrides.get("n0", 100)
        omega1, omega2, period = commensurate_driving(n0 + k + 0.5)
        data = {"d": math.pi, "n0": n0, "m0": n0, "k": k, "a": 0.01, "f0": 10.0, "omega1": omega1, "omega2": omega2, "period": period}
        data.update(overrides)
        return ModelParams(**data)

    return factory


@pytest.fixture
def desk_params(make_params) -> ModelParams:
    return make_params()


@pytest.fixture
def small_truncation() -> Truncation:
    """17 x 9 = 153 basis states."""
    return Truncation.symmetric(8, 4)


@pytest.fixture
def undriven(desk_params) -> DrivingField:
    return desk_params.driving(f_scale=0.0)
