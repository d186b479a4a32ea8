from argparse import Namespace

from cli.common import (
    add_jobs_option,
    add_measure_options,
    manifest_path_for,
    measure_config_from_args,
    select_radius,
    write_manifest,
)
from core.exceptions import EXIT_OK
from crud.cloud_crud import load_cloud_directory
from crud.matrix_crud import metadata_path, save_matrix
from middleware.logging import StageTimer
from services.matrix_service import similarity_matrix


def register(subparsers) -> None:
    parser = subparsers.add_parser("matrix", help="All-pairs score matrix of a cloud directory")
    parser.add_argument("clouds", help="Directory of cloud CSV files")
    add_measure_options(parser)
    parser.add_argument("--radius", type=float, default=None, help="Extraction radius to use")
    parser.add_argument("--symmetrize", action="store_true", help="Average the matrix with its transpose")
    parser.add_argument("--out", required=True, help="Matrix CSV path")
    add_jobs_option(parser)
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    timer = StageTimer()
    with timer.stage("load"):
        radius, clouds = select_radius(load_cloud_directory(args.clouds), args.radius)
    cfg = measure_config_from_args(args)
    with timer.stage("matrix"):
        matrix = similarity_matrix(
            clouds, cfg, jobs=args.jobs, symmetrize=args.symmetrize, radius=radius
        )
    save_matrix(matrix, args.out)
    print(f"{len(matrix)}x{len(matrix)} {cfg.kind.value} matrix written to {args.out}")
    write_manifest(
        manifest_path_for(args.out),
        args,
        [args.clouds],
        [args.out, metadata_path(args.out)],
        timer,
        orientation=cfg.orientation,
        params=matrix.params,
    )
    return EXIT_OK
