import os
from argparse import Namespace

from cli.common import manifest_path_for, write_manifest
from core.exceptions import EXIT_OK
from crud.matrix_crud import load_matrix
from crud.report_crud import save_projection
from middleware.logging import StageTimer
from utils.kpca import kpca_project


def register(subparsers) -> None:
    parser = subparsers.add_parser("kpca", help="Kernel PCA projection of a saved similarity matrix")
    parser.add_argument("matrix", help="Matrix CSV written by the matrix command")
    parser.add_argument("--components", type=int, default=2)
    parser.add_argument("--out", required=True, help="Projection CSV path")
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    timer = StageTimer()
    matrix = load_matrix(args.matrix)
    with timer.stage("kpca"):
        projection = kpca_project(matrix, args.components)
    save_projection(projection, args.out)
    if projection.fewer_components:
        print(f"warning: only {len(projection.eigenvalues)} positive components")
    print(f"discarded negative mass {projection.discarded_negative_mass:.4f}")
    write_manifest(
        manifest_path_for(args.out),
        args,
        [args.matrix],
        [args.out, os.path.splitext(args.out)[0] + ".json"],
        timer,
    )
    return EXIT_OK
