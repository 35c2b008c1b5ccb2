"""
Unit tests for version lookup.
"""

from importlib.metadata import PackageNotFoundError

import pytest
from unittest.mock import patch

from arnold_waveguide.init import PACKAGE_NAME, get_code_version


@pytest.fixture(autouse=True)
def clear_version_cache():
    get_code_version.cache_clear()
    yield
    get_code_version.cache_clear()


def test_installed_version():
    with patch("arnold_waveguide.init.version", return_value="1.2.3") as mock_version:
        assert get_code_version() == "1.2.3"
        mock_version.assert_called_once_with(PACKAGE_NAME)


def test_source_checkout_reports_unknown():
    """Running without installed metadata is not an error."""
    with patch("arnold_waveguide.init.version", side_effect=PackageNotFoundError(PACKAGE_NAME)):
        assert get_code_version() == "unknown"


def test_version_is_cached():
    with patch("arnold_waveguide.init.version", return_value="0.1.0") as mock_version:
        get_code_version()
        get_code_version()
        assert mock_version.call_count == 1
