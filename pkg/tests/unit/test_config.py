"""
Unit tests for configuration management.
"""

from pathlib import Path

import pytest
from unittest.mock import patch

from arnold_waveguide.config import DEFAULT_CLASSIFICATION, DEFAULT_TOLERANCES, Config, get_config, get_config_dir, get_tolerance, _load_json, _load_settings


@pytest.fixture(autouse=True)
def clear_caches():
    """Clear all lru_cache decorators before each test."""
    _load_json.cache_clear()
    _load_settings.cache_clear()
    get_config_dir.cache_clear()
    yield
    _load_json.cache_clear()
    _load_settings.cache_clear()
    get_config_dir.cache_clear()


class TestConfigDefaults:
    """Test built-in defaults when settings.json is absent."""

    def test_missing_settings_file_gives_defaults(self):
        """A missing settings.json is not an error."""
        with patch("arnold_waveguide.config._load_json", side_effect=FileNotFoundError("nope")):
            config = Config()
            assert config.tolerances == DEFAULT_TOLERANCES
            assert config.classification == DEFAULT_CLASSIFICATION
            assert config.read_only is False
            assert config.excluded_tags == set()
            assert config.output_dir == Path("results")

    def test_localization_defaults(self):
        with patch("arnold_waveguide.config._load_json", return_value={}):
            assert Config().localization == {"window_periods": 100}

    def test_max_workers_is_at_least_one(self):
        with patch("arnold_waveguide.config._load_json", return_value={"max_workers": 0}):
            assert Config().max_workers == 1


class TestConfigOverrides:
    """Test that settings overlay defaults key by key."""

    def test_tolerance_override_keeps_other_defaults(self):
        with patch("arnold_waveguide.config._load_json", return_value={"tolerances": {"unitarity": 1e-9}}):
            tolerances = Config().tolerances
            assert tolerances["unitarity"] == 1e-9
            assert tolerances["hermiticity"] == DEFAULT_TOLERANCES["hermiticity"]

    def test_excluded_tags(self):
        with patch("arnold_waveguide.config._load_json", return_value={"excluded_tags": ["run", "run"]}):
            assert Config().excluded_tags == {"run"}

    def test_scale_override_merges_preset(self):
        with patch("arnold_waveguide.config._load_json", return_value={"scales": {"ci": {"ensemble_count": 50}}}):
            scale = Config().get_scale("ci")
            assert scale["ensemble_count"] == 50
            assert scale["r_max"] == 16

    def test_unknown_scale(self):
        with patch("arnold_waveguide.config._load_json", return_value={}):
            with pytest.raises(KeyError, match="Unknown scale"):
                Config().get_scale("huge")

    def test_scale_names(self):
        with patch("arnold_waveguide.config._load_json", return_value={"scales": {"desk": {"omega_target": 50.6}}}):
            assert Config().scale_names == ["ci", "desk", "paper"]


class TestGetTolerance:
    def test_known(self):
        with patch("arnold_waveguide.config._load_json", return_value={}):
            assert get_tolerance("leakage_abort") == 0.05

    def test_default_for_unknown(self):
        with patch("arnold_waveguide.config._load_json", return_value={}):
            assert get_tolerance("nonexistent", 0.5) == 0.5

    def test_unknown_without_default(self):
        with patch("arnold_waveguide.config._load_json", return_value={}):
            with pytest.raises(KeyError):
                get_tolerance("nonexistent")


class TestConfigDir:
    def test_env_override(self, tmp_path, monkeypatch):
        """An explicit directory is returned even if it does not exist."""
        target = tmp_path / "missing"
        monkeypatch.setenv("ARNOLD_WAVEGUIDE_CONFIG_DIR", str(target))
        assert get_config_dir() == target

    def test_settings_loaded_from_env_dir(self, tmp_path, monkeypatch):
        (tmp_path / "settings.json").write_text('{"read_only": true}', encoding="utf-8")
        monkeypatch.setenv("ARNOLD_WAVEGUIDE_CONFIG_DIR", str(tmp_path))
        assert Config().read_only is True
        assert Config().experiments_dir == tmp_path / "experiments"

    def test_settings_not_an_object(self, tmp_path, monkeypatch):
        (tmp_path / "settings.json").write_text("[1, 2]", encoding="utf-8")
        monkeypatch.setenv("ARNOLD_WAVEGUIDE_CONFIG_DIR", str(tmp_path))
        with pytest.raises(ValueError, match="JSON object"):
            Config().read_only


class TestGetConfigSingleton:
    """Test get_config singleton pattern."""

    def test_returns_same_instance(self):
        assert get_config() is get_config()
