"""
This module handles the initialization of the application: logging setup and the
package version stamped into run manifests. It must be importable before any
numerical module, since they all share the logger defined here.
"""

import logging
import os
from functools import lru_cache
from importlib.metadata import PackageNotFoundError, version


PACKAGE_NAME = "arnold-waveguide"

# Constants
_log_level = os.getenv("ARNOLD_WAVEGUIDE_LOG_LEVEL", "INFO")
_log_file_path = os.getenv("ARNOLD_WAVEGUIDE_LOG_FILE_PATH", "arnold_waveguide.log")

# Logging
logging.basicConfig(
    filename=_log_file_path,
    filemode="a",
    format="%(asctime)s: %(levelname)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, _log_level.upper(), logging.INFO))


@lru_cache
def get_code_version() -> str:
    """
    Return the installed package version for run manifests.

    Running from a source checkout without installing the package is supported,
    in which case the version is reported as 'unknown' rather than failing the run.

    Returns:
        Version string, or 'unknown' when the distribution metadata is missing.
    """
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        logger.debug("Package metadata for '%s' not found, reporting version as unknown", PACKAGE_NAME)
        return "unknown"
