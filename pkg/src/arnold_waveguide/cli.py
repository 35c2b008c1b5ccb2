"""
Command-line entry point: `arnold-waveguide <run> --config <file> [--out DIR] [--seed N] [--scale {paper,ci}]`.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 physics or
convergence failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from pydantic import BaseModel

from arnold_waveguide.errors import ArnoldWaveguideError
from arnold_waveguide.init import PACKAGE_NAME, get_code_version, logger
from arnold_waveguide.models import RunConfig, RunKind, ScaleName
from arnold_waveguide.pipeline import load_config, run_pipeline


RUN_HELP = {
    RunKind.SPECTRUM: "Stationary spectrum: level groups, separatrix and layer size",
    RunKind.EVOLVE: "Wave-packet evolution under the drive and quantum diffusion fit",
    RunKind.QE: "Quasienergy states of the one-period propagator",
    RunKind.CLASSICAL: "Classical trajectory ensemble and classical diffusion fit",
    RunKind.COMPARE: "Classical versus quantum diffusion over a grid of amplitudes",
}


def schema_summary(model: type[BaseModel] = RunConfig) -> str:
    """One line per experiment-file key, sections expanded."""
    lines = ["experiment file keys:"]
    for name, info in model.model_fields.items():
        annotation = info.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel):
            lines.append(f"  {name}: {info.description or ''}")
            for sub_name, sub_info in annotation.model_fields.items():
                lines.append(f"    {name}.{sub_name}: {sub_info.description or ''}")
        else:
            lines.append(f"  {name}: {info.description or ''}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PACKAGE_NAME,
        description="Arnold diffusion in a rippled waveguide under a two-frequency field.",
        epilog=schema_summary(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_code_version()}")
    subparsers = parser.add_subparsers(dest="run", required=True, metavar="{" + ",".join(RUN_HELP) + "}")
    for run, text in RUN_HELP.items():
        sub = subparsers.add_parser(run.value, help=text, description=text, epilog=schema_summary(), formatter_class=argparse.RawDescriptionHelpFormatter)
        sub.add_argument("--config", required=True, help="JSON experiment file")
        sub.add_argument("--out", default=None, help="Artifact folder, overrides output_dir")
        sub.add_argument("--seed", type=int, default=None, help="Ensemble seed, overrides ensemble.seed")
        sub.add_argument("--scale", choices=[s.value for s in ScaleName], default=None, help="Parameter preset, overrides scale")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one experiment.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, run=args.run, scale=args.scale, seed=args.seed, output_dir=args.out)
        result = run_pipeline(config)
    except ArnoldWaveguideError as e:
        logger.error("%s failed (%s): %s", args.run, e.category, e)
        print(f"error [{e.category}]: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("%s failed unexpectedly: %s", args.run, e)
        print(f"error [internal]: {e}", file=sys.stderr)
        return 1

    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"{args.run}: {len(result.artifacts)} artifacts in {result.output_dir}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
