"""
MCP Server for the rippled-waveguide simulator

Exposes resonance lookup, model description and experiment runs as tools, and the
experiment schema, scale presets and experiment files as resources.
"""

from fastmcp import FastMCP
from fastmcp.server.transforms import ResourcesAsTools, Transform

from arnold_waveguide.config import get_config
from arnold_waveguide.init import logger
from arnold_waveguide.providers import experiments_provider, resources_provider


class ReadOnlyToolFilter(Transform):
    """Shows only tools marked as read-only to the LLM.

    A tool with no annotations (or readOnlyHint unset) is hidden, so a tool that
    writes artifacts never appears in read-only mode by omission.
    """

    async def list_tools(self, tools):
        return [t for t in tools if t.annotations and t.annotations.readOnlyHint]


mcp = FastMCP("Arnold Waveguide MCP Server")

mcp.add_provider(resources_provider)
mcp.add_provider(experiments_provider)


def configure(server: FastMCP) -> FastMCP:
    """Apply read-only mode and tag exclusions from settings."""
    settings = get_config()
    if settings.read_only:
        server.add_transform(ReadOnlyToolFilter())
        logger.info("Read-only mode: only read-only tools shown")

    disabled = settings.excluded_tags
    if disabled:
        server.disable(tags=disabled)
        logger.info("Disabled tools with tags: %s", disabled)

    server.add_transform(ResourcesAsTools(server))
    return server


# Run the MCP server locally
if __name__ == "__main__":
    configure(mcp).run()
