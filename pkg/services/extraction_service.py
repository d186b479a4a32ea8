import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from core.config import DEFAULT_JOBS
from core.dependencies import get_worker_pool
from core.exceptions import PocketError
from crud.cloud_crud import load_structure
from schemas.params import ExtractionConfig
from schemas.structure import ExtractionRecord
from utils.pdb import cloud_at_radius, extract_ligand

logger = logging.getLogger(__name__)

ExtractionTask = Tuple[str, ExtractionConfig, Tuple[float, ...], bool]


def _extract_file(task: ExtractionTask) -> Tuple[List[ExtractionRecord], Optional[str]]:
    path, cfg, radii, ligand_cloud = task
    cloud_id = os.path.splitext(os.path.basename(path))[0]
    try:
        structure = load_structure(path)
        if ligand_cloud:
            cloud = extract_ligand(structure, cfg.ligand_code, cfg.ligand_chain, cfg.ligand_res_seq, cloud_id)
            return [ExtractionRecord(source=path, cloud=cloud, structure_atoms=len(structure.protein_atoms))], None
        records = [
            ExtractionRecord(
                source=path,
                cloud=cloud_at_radius(structure, cfg, radius, cloud_id),
                cutoff_radius=radius,
                structure_atoms=len(structure.protein_atoms),
            )
            for radius in radii
        ]
        return records, None
    except PocketError as e:
        return [], e.detail
    except ValidationError as e:
        return [], f"invalid atoms: {e.errors()[0].get('msg', '')}"


def extract_many(
    paths: Sequence[str],
    cfg: ExtractionConfig,
    radii: Optional[Sequence[float]] = None,
    ligand_cloud: bool = False,
    jobs: Optional[int] = None,
) -> Tuple[List[ExtractionRecord], Dict[str, str]]:
    """
    Extract pockets (or ligand clouds) from many structure files.

    Args:
        paths (Sequence[str]): Structure files.
        cfg (ExtractionConfig): Ligand selection and charge settings.
        radii (Sequence[float], optional): Cutoff radii; defaults to cfg.cutoff_radius.
        ligand_cloud (bool): Extract the ligand's own atoms instead of the pocket.
        jobs (int, optional): Worker processes.

    Returns:
        Tuple[List[ExtractionRecord], Dict[str, str]]: Records in input order and
        the error message of every failed file.
    """
    radii = tuple(radii) if radii else (cfg.cutoff_radius,)
    tasks = [(path, cfg, radii, ligand_cloud) for path in paths]

    workers = max(1, min(jobs if jobs is not None else DEFAULT_JOBS, len(tasks)))
    with get_worker_pool(workers) as pool:
        outcomes = list(map(_extract_file, tasks)) if pool is None else list(pool.map(_extract_file, tasks))

    records: List[ExtractionRecord] = []
    errors: Dict[str, str] = {}
    for path, (file_records, error) in zip(paths, outcomes):
        if error is not None:
            logger.warning(f"Extraction failed for {path}: {error}")
            errors[path] = error
        records.extend(file_records)
    logger.info(f"Extracted {len(records)} clouds from {len(paths) - len(errors)}/{len(paths)} structures")
    return records, errors
