"""
Providers package for the waveguide MCP server.

Uses LocalProvider to organize tools into modular components.
"""

from arnold_waveguide.providers.resources_provider import resources_provider
from arnold_waveguide.providers.experiments_provider import experiments_provider

__all__ = [
    "resources_provider",
    "experiments_provider",
]
