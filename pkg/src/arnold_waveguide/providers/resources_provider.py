"""
Resources provider for the waveguide MCP server.

Provides read-only data resources for discovery: the experiment schema, scale presets
and the available experiment files.
"""

import json

from fastmcp.resources import ResourceResult
from fastmcp.server.providers import LocalProvider

from arnold_waveguide.config import get_config
from arnold_waveguide.init import logger
from arnold_waveguide.models import RunConfig
from arnold_waveguide.pipeline import available_experiments, experiment_path
from arnold_waveguide.utils import json_resource, mcp_handler


resources_provider = LocalProvider()


@resources_provider.resource("arnold://schema/run-config")
@mcp_handler(scope="resource")
def get_run_config_schema() -> ResourceResult:
    """
    Returns the JSON schema of experiment files. Unknown keys are rejected.
    """
    return json_resource(RunConfig.model_json_schema())


@resources_provider.resource("arnold://scales")
@mcp_handler(scope="resource")
def get_scales() -> ResourceResult:
    """
    Returns the scale presets used to fill omitted truncation and numerics.
    """
    config = get_config()
    data = {name: config.get_scale(name) for name in config.scale_names}
    logger.debug("Retrieved %d scale presets", len(data))
    return json_resource(data)


@resources_provider.resource("arnold://experiments")
@mcp_handler(scope="resource")
def get_experiment_list() -> ResourceResult:
    """
    Returns the names of available experiments.

    Use `arnold://experiments/{name}` to read one, or pass the name to `run_experiment`.
    """
    names = sorted(available_experiments())
    logger.debug("Retrieved %d experiments", len(names))
    return json_resource(names)


@resources_provider.resource("arnold://experiments/{name}")
@mcp_handler(scope="resource")
def get_experiment(name: str) -> ResourceResult:
    """
    Returns the contents of one experiment file.
    """
    path = experiment_path(name)
    return json_resource(json.loads(path.read_text(encoding="utf-8")))
