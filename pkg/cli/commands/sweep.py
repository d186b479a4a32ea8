from argparse import Namespace

from cli.common import (
    add_grid_options,
    add_jobs_option,
    add_measure_options,
    grid_from_args,
    manifest_path_for,
    measure_config_from_args,
    select_radius,
    write_manifest,
)
from core.exceptions import EXIT_OK
from crud.cloud_crud import load_cloud_directory
from crud.report_crud import save_sweep
from middleware.logging import StageTimer
from services.evaluation_service import sweep


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="Mean AUC and classification error over sigma and lambda")
    parser.add_argument("clouds", help="Directory of cloud CSV files")
    add_measure_options(parser)
    add_grid_options(parser)
    parser.add_argument("--radius", type=float, default=None, help="Extraction radius to use")
    parser.add_argument("--out", required=True, help="Sweep CSV path")
    add_jobs_option(parser)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        _, clouds = select_radius(load_cloud_directory(args.clouds), args.radius)
    cfg = measure_config_from_args(args)
    grid = grid_from_args(args)
    rows = sweep(clouds, cfg.kind, grid, cfg, jobs=args.jobs, timer=timer)
    save_sweep(rows, args.out)
    print(f"{len(rows)} sweep rows written to {args.out}")
    write_manifest(manifest_path_for(args.out), args, [args.clouds], [args.out], timer, grid=grid)
    return EXIT_OK
