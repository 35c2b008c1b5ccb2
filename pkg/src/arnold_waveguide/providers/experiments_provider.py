"""
Experiment tools provider for the waveguide MCP server.

Uses LocalProvider for modular organization and callable decorator pattern.
"""

import math
from typing import Annotated

from fastmcp.server.providers import LocalProvider
from fastmcp.tools import ToolResult
from pydantic import Field

from arnold_waveguide.init import logger
from arnold_waveguide.models import RunKind, ScaleName
from arnold_waveguide.physics.basis import Truncation, locate_resonance, longitudinal_frequency, transverse_frequency, unperturbed_energy
from arnold_waveguide.physics.floquet import required_steps
from arnold_waveguide.pipeline import experiment_path, load_config, run_pipeline
from arnold_waveguide.utils import mcp_handler


experiments_provider = LocalProvider()


def _resolve_path(experiment: str | None, config_path: str | None) -> str:
    if config_path:
        return config_path
    if experiment:
        return str(experiment_path(experiment))
    raise ValueError("Either 'experiment' or 'config_path' is required")


@experiments_provider.tool(tags={"model"}, annotations={"readOnlyHint": True, "destructiveHint": False})
@mcp_handler(scope="tool")
def find_coupling_resonance(
    omega_target: Annotated[float, Field(description="Target resonance frequency", gt=0)],
    d: Annotated[float, Field(description="Channel width", gt=0)] = math.pi,
    k: Annotated[float, Field(description="Bloch wave number in (-1/2, 1/2), k != 0")] = 0.1,
    direction: Annotated[int, Field(description="+1 for n0 > 0, -1 for the counter-propagating branch")] = 1,
) -> ToolResult:
    """
    Finds the coupling resonance ω_n0 ≈ ω_m0 closest to a target frequency.

    Returns n0, m0, both frequencies and their detuning.
    """
    n0, m0, detuning = locate_resonance(omega_target, d, k, direction)
    logger.info("Located resonance n0=%d, m0=%d for omega_target=%s", n0, m0, omega_target)
    return ToolResult(
        structured_content={
            "status": "success",
            "n0": n0,
            "m0": m0,
            "omega_n0": longitudinal_frequency(n0, k, direction),
            "omega_m0": transverse_frequency(m0, d),
            "detuning": detuning,
        }
    )


@experiments_provider.tool(tags={"model"}, annotations={"readOnlyHint": True, "destructiveHint": False})
@mcp_handler(scope="tool")
def describe_model(
    experiment: Annotated[str | None, Field(description="Name of an experiment from arnold://experiments")] = None,
    config_path: Annotated[str | None, Field(description="Path to an experiment JSON file, instead of a name")] = None,
    scale: Annotated[ScaleName | None, Field(description="Override the experiment's scale preset")] = None,
) -> ToolResult:
    """
    Resolves an experiment without running it.

    ## RETURNS
    The resolved configuration plus derived quantities: resonance frequencies, driving
    cycles per period, basis dimension, resonance energy and the minimum split steps
    per period required by the drive.
    """
    config = load_config(_resolve_path(experiment, config_path), scale=scale)
    params = config.params()
    truncation = Truncation.symmetric(config.truncation.r_max, config.truncation.p_window)
    driving = params.driving(config.driving.f_scale)
    return ToolResult(
        structured_content={
            "status": "success",
            "config": config.model_dump(mode="json"),
            "derived": {
                "omega_n0": params.omega_n0,
                "omega_m0": params.omega_m0,
                "epsilon": params.epsilon,
                "cycles": list(driving.cycles()),
                "dimension": truncation.dimension,
                "energy": unperturbed_energy(params.n0, params.m0, params.k, params.d),
                # upper bound, since ‖y‖ < d
                "min_steps_per_period": required_steps(driving, params.d),
            },
        }
    )


@experiments_provider.tool(tags={"run"}, annotations={"readOnlyHint": False, "destructiveHint": False})
@mcp_handler(scope="tool")
def run_experiment(
    experiment: Annotated[str | None, Field(description="Name of an experiment from arnold://experiments")] = None,
    config_path: Annotated[str | None, Field(description="Path to an experiment JSON file, instead of a name")] = None,
    run: Annotated[RunKind | None, Field(description="Override the experiment's run kind")] = None,
    scale: Annotated[ScaleName | None, Field(description="Override the experiment's scale preset")] = None,
    seed: Annotated[int | None, Field(description="Override the ensemble seed", ge=0)] = None,
    output_dir: Annotated[str | None, Field(description="Artifact folder")] = None,
) -> ToolResult:
    """
    Runs an experiment and writes its artifacts.

    ## BEHAVIOR
    Paper-scale runs take hours; prefer scale 'ci' unless asked otherwise.
    Existing artifacts are only rewritten when their content changes.
    """
    config = load_config(_resolve_path(experiment, config_path), run=run, scale=scale, seed=seed, output_dir=output_dir)
    result = run_pipeline(config)
    return ToolResult(
        structured_content={
            "status": "success",
            "output_dir": str(result.output_dir),
            "artifacts": result.artifacts,
            "warnings": result.warnings,
            "summary": result.summary.model_dump(mode="json"),
        }
    )
