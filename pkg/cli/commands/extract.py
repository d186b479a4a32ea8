import logging
import os
from argparse import Namespace

from cli.common import add_jobs_option, write_manifest
from core.config import CHARGE_TABLE_PATH
from core.constants import DEFAULT_CUTOFF_RADIUS
from core.exceptions import EXIT_INPUT_ERROR, EXIT_OK
from crud.cloud_crud import save_cloud
from middleware.error_handler import report_error
from middleware.logging import StageTimer
from schemas.params import ExtractionConfig, MissingChargePolicy
from services.extraction_service import extract_many
from utils.pdb import load_charge_table

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("extract", help="Extract pocket (or ligand) clouds from structure files")
    parser.add_argument("structures", nargs="+", help="Structure files")
    parser.add_argument("--ligand", required=True, help="Het code of the ligand")
    parser.add_argument("--chain", default=None, help="Chain of the ligand when the code is ambiguous")
    parser.add_argument("--res-seq", type=int, default=None, help="Residue number of the ligand")
    parser.add_argument("--radius", type=float, nargs="+", default=[DEFAULT_CUTOFF_RADIUS],
                        help="Cutoff radius (several values extract one pocket per radius)")
    parser.add_argument("--charges", default=None,
                        help="Charge table CSV res_name,atom_name,charge (default: $POCKET_CHARGE_TABLE)")
    parser.add_argument("--missing-charge", choices=[p.value for p in MissingChargePolicy],
                        default=MissingChargePolicy.ZERO.value)
    parser.add_argument("--include-hetero", action="store_true", help="Keep non-ligand het atoms in pockets")
    parser.add_argument("--include-water", action="store_true", help="With --include-hetero, keep waters too")
    parser.add_argument("--ligand-cloud", action="store_true", help="Write the ligand's own atoms instead")
    parser.add_argument("--out-dir", required=True)
    add_jobs_option(parser)
    parser.set_defaults(handler=run)


def _charge_table(args: Namespace):
    if args.charges:
        return load_charge_table(args.charges), args.charges
    if os.path.isfile(CHARGE_TABLE_PATH):
        return load_charge_table(CHARGE_TABLE_PATH), CHARGE_TABLE_PATH
    logger.warning(f"Charge table {CHARGE_TABLE_PATH} not found, all charges set to 0")
    return {}, None


def run(args: Namespace) -> int:
    """
    Extract one cloud per structure (and per radius) into --out-dir.
    """
    timer = StageTimer()
    table, table_path = ({}, None) if args.ligand_cloud else _charge_table(args)
    cfg = ExtractionConfig(
        cutoff_radius=args.radius[0],
        ligand_code=args.ligand,
        ligand_chain=args.chain,
        ligand_res_seq=args.res_seq,
        charge_table=table,
        missing_charge_policy=MissingChargePolicy(args.missing_charge),
        include_hetero=args.include_hetero,
        include_water=args.include_water,
    )

    with timer.stage("extract"):
        records, errors = extract_many(args.structures, cfg, args.radius, args.ligand_cloud, args.jobs)

    outputs = []
    several_radii = len(args.radius) > 1 and not args.ligand_cloud
    with timer.stage("write"):
        for record in records:
            name = record.cloud.id
            if several_radii:
                name = f"{name}_r{record.cutoff_radius:g}"
            path = save_cloud(
                record.cloud,
                os.path.join(args.out_dir, f"{name}.csv"),
                source_file=record.source,
                cutoff_radius=record.cutoff_radius,
            )
            outputs.append(path)
            radius = "" if record.cutoff_radius is None else f" at R={record.cutoff_radius:g}"
            kind = "ligand" if args.ligand_cloud else "pocket"
            print(f"{record.source}: {record.structure_atoms} atoms, {kind} {len(record.cloud)} atoms{radius}")

    for path, detail in errors.items():
        report_error(f"{path}: {detail}")

    write_manifest(
        os.path.join(args.out_dir, "extract.manifest.json"),
        args,
        list(args.structures) + ([table_path] if table_path else []),
        outputs,
        timer,
        charge_table=table_path,
        failed=errors,
    )
    if not records:
        return EXIT_INPUT_ERROR
    return EXIT_OK
