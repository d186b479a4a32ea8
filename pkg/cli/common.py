"""
Options and helpers shared by the sub-commands.
"""
import logging
import math
import os
import platform
import sys
from argparse import ArgumentParser, Namespace
from typing import Any, Dict, List, Optional, Tuple

import psutil

from core.config import APP_VERSION, DEFAULT_JOBS, DEFAULT_SEED
from core.constants import (
    DEFAULT_ALPHA_VALUES,
    DEFAULT_EXTRA_RANDOM_STARTS,
    DEFAULT_K_VALUES,
    DEFAULT_LAMBDA,
    DEFAULT_LAMBDA_VALUES,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_OVERLAP_TOLERANCE,
    DEFAULT_SIGMA,
    DEFAULT_SIGMA_VALUES,
)
from core.exceptions import InputError
from crud.report_crud import write_json
from middleware.logging import StageTimer
from schemas.cloud import AtomCloud
from schemas.params import AlignConfig, HyperGrid, MeasureConfig, MeasureKind
from schemas.results import RunManifest

logger = logging.getLogger(__name__)

MEASURE_CHOICES = [kind.value for kind in MeasureKind]


def add_jobs_option(parser: ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, default=DEFAULT_JOBS,
                        help="Worker processes for pair computations (default: available cores)")


def add_measure_options(parser: ArgumentParser, default_measure: str = MeasureKind.SUP_CK.value) -> None:
    """Measure kind, kernel widths and optimizer settings."""
    parser.add_argument("--measure", choices=MEASURE_CHOICES, default=default_measure)
    parser.add_argument("--sigma", type=float, default=DEFAULT_SIGMA, help="Gaussian width in Angstrom")
    parser.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                        help="Label width; 'inf' ignores labels")
    parser.add_argument("--alpha", type=float, default=0.0, help="Vol coefficient of the combined measures")
    parser.add_argument("--overlap-tolerance", type=float, default=DEFAULT_OVERLAP_TOLERANCE,
                        help="Overlap distance of sup-PI in Angstrom")
    parser.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS)
    parser.add_argument("--extra-random-starts", type=int, default=DEFAULT_EXTRA_RANDOM_STARTS)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)


def measure_config_from_args(args: Namespace) -> MeasureConfig:
    align = AlignConfig(
        sigma=args.sigma,
        lambda_=args.lam,
        max_iterations=args.max_iterations,
        extra_random_starts=args.extra_random_starts,
        seed=args.seed,
    )
    return MeasureConfig(
        kind=MeasureKind(args.measure),
        align=align,
        overlap_tolerance=args.overlap_tolerance,
        alpha=args.alpha,
    )


def add_grid_options(parser: ArgumentParser) -> None:
    """Hyperparameter grids of the double cross-validation."""
    parser.add_argument("--k-values", type=int, nargs="+", default=list(DEFAULT_K_VALUES))
    parser.add_argument("--sigma-values", type=float, nargs="+", default=list(DEFAULT_SIGMA_VALUES))
    parser.add_argument("--lambda-values", type=float, nargs="+", default=list(DEFAULT_LAMBDA_VALUES))
    parser.add_argument("--alpha-values", type=float, nargs="+", default=list(DEFAULT_ALPHA_VALUES),
                        help="Multipliers of median(sup-CK) / median(Vol)")


def grid_from_args(args: Namespace) -> HyperGrid:
    return HyperGrid(
        k_values=args.k_values,
        sigma_values=args.sigma_values,
        lambda_values=args.lambda_values,
        alpha_values=args.alpha_values,
        seed=args.seed,
    )


def select_radius(
    groups: Dict[Optional[float], List[AtomCloud]], radius: Optional[float]
) -> Tuple[Optional[float], List[AtomCloud]]:
    """Clouds extracted at one radius; the radius may be omitted when there is only one."""
    if radius is not None:
        for key, clouds in groups.items():
            if key is not None and math.isclose(key, radius):
                return key, clouds
        raise InputError(f"No clouds at radius {radius}; available: {[r for r in groups]}")
    if len(groups) > 1:
        raise InputError(f"Clouds at several radii {[r for r in groups]}, choose one with --radius")
    return next(iter(groups.items()))


def manifest_path_for(output: str) -> str:
    return os.path.splitext(output)[0] + ".manifest.json"


def host_info() -> Dict[str, Any]:
    return {
        "cpu_count": psutil.cpu_count(),
        "platform": platform.platform(),
        "python_version": f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
    }


def resolved_config(args: Namespace, **extra: Any) -> Dict[str, Any]:
    """Every argument value, defaults included, plus resolved settings."""
    config = {key: value for key, value in vars(args).items() if key != "handler"}
    config.update(extra)
    return config


def write_manifest(
    path: str,
    args: Namespace,
    inputs: List[str],
    outputs: List[str],
    timer: StageTimer,
    **extra: Any,
) -> str:
    """
    Write the run manifest of a command.

    Args:
        path (str): Manifest path.
        args (Namespace): Parsed arguments.
        inputs (List[str]): Input paths.
        outputs (List[str]): Output paths.
        timer (StageTimer): Stage timings.
        **extra: Resolved settings added to the config record.

    Returns:
        str: The manifest path.
    """
    manifest = RunManifest(
        command=args.command,
        inputs=inputs,
        outputs=outputs,
        config=resolved_config(args, **extra),
        seed=getattr(args, "seed", DEFAULT_SEED),
        tool_version=APP_VERSION,
        timings=timer.timings,
        host=host_info(),
    )
    write_json(manifest, path)
    logger.info(f"Run manifest written to {path}")
    return path
