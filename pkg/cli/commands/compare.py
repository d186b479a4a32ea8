import logging
import math
import os
from argparse import Namespace
from typing import Optional

from cli.common import add_measure_options, manifest_path_for, measure_config_from_args, write_manifest
from core.config import FLOAT_FORMAT
from core.exceptions import EXIT_OK, InputError, ParameterError
from crud.cloud_crud import load_cloud, save_cloud
from crud.report_crud import write_json
from middleware.logging import StageTimer
from schemas.cloud import AtomCloud
from schemas.params import MeasureConfig, MeasureKind, Orientation
from schemas.results import AlignResult
from utils.align import sup_ck
from utils.geometry import kernel_ck, transform_cloud
from utils.measures import compute_measure

logger = logging.getLogger(__name__)

KERNEL_KINDS = (MeasureKind.SUP_CK, MeasureKind.SUP_CK_L)


def register(subparsers) -> None:
    parser = subparsers.add_parser("compare", help="Score one pair of clouds")
    parser.add_argument("cloud_a", help="Fixed cloud CSV")
    parser.add_argument("cloud_b", help="Moving cloud CSV")
    add_measure_options(parser)
    parser.add_argument("--symmetrize", action="store_true", help="Report the better score of both directions")
    parser.add_argument("--no-align", action="store_true", help="Kernel at the identity transform")
    parser.add_argument("--dump-transform", default=None,
                        help="JSON path for the best transform; the moved copy of B goes to <stem>_moved.csv")
    parser.add_argument("--out", default=None, help="JSON path for the score")
    parser.set_defaults(handler=run)


def check_label_settings(cfg: MeasureConfig, cloud_a: AtomCloud, cloud_b: AtomCloud) -> None:
    """A finite lambda needs a labelled measure and labelled clouds."""
    if math.isinf(cfg.align.lambda_):
        return
    if not cfg.kind.uses_labels:
        raise InputError(f"--lambda applies to the labelled measures only, not {cfg.kind.value}")
    unlabelled = [cloud.id for cloud in (cloud_a, cloud_b) if not cloud.is_labelled]
    if unlabelled:
        raise InputError(f"finite lambda with unlabelled clouds: {', '.join(unlabelled)}")


def _score(cfg: MeasureConfig, cloud_a: AtomCloud, cloud_b: AtomCloud, args: Namespace):
    alignment: Optional[AlignResult] = None
    if args.no_align:
        if cfg.kind not in KERNEL_KINDS:
            raise ParameterError("--no-align applies to sup_ck and sup_ck_l only")
        align = cfg.effective_align()
        forward = kernel_ck(cloud_a, cloud_b, None, align.sigma, align.lambda_)
        backward = kernel_ck(cloud_b, cloud_a, None, align.sigma, align.lambda_)
    elif cfg.kind in KERNEL_KINDS:
        alignment = sup_ck(cloud_a, cloud_b, cfg.effective_align())
        forward = alignment.score
        backward = sup_ck(cloud_b, cloud_a, cfg.effective_align()).score if args.symmetrize else forward
    else:
        forward = compute_measure(cloud_a, cloud_b, cfg)
        backward = compute_measure(cloud_b, cloud_a, cfg) if args.symmetrize else forward
    if not args.symmetrize:
        return forward, alignment
    better = max if cfg.orientation == Orientation.SIMILARITY else min
    return better(forward, backward), alignment


def run(args: Namespace) -> int:
    """
    Print the score of cloud B against cloud A.
    """
    timer = StageTimer()
    with timer.stage("load"):
        cloud_a, _ = load_cloud(args.cloud_a)
        cloud_b, _ = load_cloud(args.cloud_b)
    cfg = measure_config_from_args(args)
    check_label_settings(cfg, cloud_a, cloud_b)
    if args.dump_transform and (args.no_align or not cfg.kind.uses_alignment):
        raise ParameterError("--dump-transform needs an aligning measure")

    with timer.stage("score"):
        score, alignment = _score(cfg, cloud_a, cloud_b, args)
        if args.dump_transform and alignment is None:
            alignment = sup_ck(cloud_a, cloud_b, cfg.effective_align())
    print(FLOAT_FORMAT % score)

    outputs = []
    if args.dump_transform:
        write_json(
            {
                "cloud_a": cloud_a.id,
                "cloud_b": cloud_b.id,
                "measure": cfg.kind,
                "sigma": cfg.effective_align().sigma,
                "lambda": cfg.effective_align().lambda_,
                "kernel_score": alignment.score,
                "transform": alignment.transform,
                "start_index": alignment.start_index,
                "iterations_used": alignment.iterations_used,
                "converged": alignment.converged,
            },
            args.dump_transform,
        )
        moved = transform_cloud(cloud_b, alignment.transform, cloud_id=f"{cloud_b.id}_aligned")
        moved_path = os.path.splitext(args.dump_transform)[0] + "_moved.csv"
        save_cloud(moved, moved_path, source_file=args.cloud_b)
        outputs += [args.dump_transform, moved_path]
    if args.out:
        write_json({"cloud_a": cloud_a.id, "cloud_b": cloud_b.id, "measure": cfg.kind, "score": score}, args.out)
        outputs.append(args.out)

    manifest = manifest_path_for(outputs[0]) if outputs else "compare.manifest.json"
    write_manifest(manifest, args, [args.cloud_a, args.cloud_b], outputs, timer, orientation=cfg.orientation)
    return EXIT_OK
