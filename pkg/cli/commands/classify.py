import os
from argparse import Namespace

from cli.common import (
    add_grid_options,
    add_jobs_option,
    add_measure_options,
    grid_from_args,
    manifest_path_for,
    measure_config_from_args,
    write_manifest,
)
from core.config import FLOAT_FORMAT
from core.exceptions import EXIT_OK
from crud.cloud_crud import load_cloud_directory
from crud.matrix_crud import load_matrix
from crud.report_crud import write_json
from middleware.logging import StageTimer
from schemas.params import ParamPoint
from schemas.results import EvalReport
from services.evaluation_service import loo_double_cv
from utils.evaluation import double_cv_from_matrices


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "classify", help="Leave-one-out double cross-validation of KNN ligand prediction"
    )
    parser.add_argument("source", help="Directory of cloud CSV files, or a saved matrix CSV")
    add_measure_options(parser)
    add_grid_options(parser)
    parser.add_argument("--out", required=True, help="Report JSON path")
    add_jobs_option(parser)
    parser.set_defaults(handler=run)


def _from_matrix(args: Namespace, timer: StageTimer) -> EvalReport:
    matrix = load_matrix(args.source, require_classes=True)
    params = matrix.params
    point = ParamPoint(sigma=params.get("sigma"), lambda_=params.get("lambda"),
                       radius=params.get("radius"), alpha=params.get("alpha"))
    with timer.stage("double_cv"):
        return double_cv_from_matrices([(point, matrix)], args.k_values, measure=matrix.measure, seed=args.seed)


def run(args: Namespace) -> int:
    """
    Double cross-validation over the grid, or over k only for a saved matrix.
    """
    timer = StageTimer()
    grid = grid_from_args(args)
    if os.path.isdir(args.source):
        with timer.stage("load"):
            groups = load_cloud_directory(args.source)
        cfg = measure_config_from_args(args)
        report = loo_double_cv(groups, cfg.kind, grid, cfg, jobs=args.jobs, timer=timer)
    else:
        report = _from_matrix(args, timer)

    write_json(report, args.out)
    mean = "undefined" if report.mean_auc is None else FLOAT_FORMAT % report.mean_auc
    print(f"classification error {FLOAT_FORMAT % report.classification_error}, mean AUC {mean}")
    write_manifest(manifest_path_for(args.out), args, [args.source], [args.out], timer, grid=grid)
    return EXIT_OK
