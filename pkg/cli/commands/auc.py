from argparse import Namespace

from cli.common import manifest_path_for, write_manifest
from core.config import FLOAT_FORMAT
from core.exceptions import EXIT_OK
from crud.matrix_crud import load_matrix
from crud.report_crud import write_json
from middleware.logging import StageTimer
from utils.evaluation import auc_report


def register(subparsers) -> None:
    parser = subparsers.add_parser("auc", help="Per-query AUC of a saved matrix")
    parser.add_argument("matrix", help="Matrix CSV written by the matrix command")
    parser.add_argument("--out", required=True, help="Report JSON path")
    parser.set_defaults(handler=run)


def run(args: Namespace) -> int:
    timer = StageTimer()
    matrix = load_matrix(args.matrix, require_classes=True)
    with timer.stage("auc"):
        report = auc_report(matrix)
    write_json(report, args.out)
    mean = "undefined" if report.mean_auc is None else FLOAT_FORMAT % report.mean_auc
    print(f"mean AUC {mean} over {len(report.ids) - len(report.missing)} queries")
    write_manifest(manifest_path_for(args.out), args, [args.matrix], [args.out], timer)
    return EXIT_OK
