import json
import logging
import math
import os
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from core.config import FLOAT_FORMAT
from core.exceptions import InputError
from schemas.cloud import Atom, AtomCloud
from schemas.structure import Structure
from utils.pdb import parse_structure

logger = logging.getLogger(__name__)

CLOUD_COLUMNS = ["x", "y", "z", "charge", "element", "res_name", "res_seq", "atom_name"]


def sidecar_path(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + ".json"


def load_structure(path: str) -> Structure:
    """
    Read and parse a structure file.

    Args:
        path (str): Path of the fixed-column structure file.

    Returns:
        Structure: Parsed structure with ``source`` set to the path.
    """
    if not os.path.isfile(path):
        raise InputError(f"Structure file not found: {path}")
    with open(path, "r", encoding="utf-8", errors="replace") as handle:
        text = handle.read()
    return parse_structure(text, source=path)


def save_cloud(
    cloud: AtomCloud,
    path: str,
    source_file: Optional[str] = None,
    cutoff_radius: Optional[float] = None,
) -> str:
    """
    Write a cloud as CSV plus its JSON sidecar.

    Args:
        cloud (AtomCloud): Cloud to write.
        path (str): CSV path; the sidecar replaces the suffix with .json.
        source_file (str, optional): Structure the cloud was extracted from.
        cutoff_radius (float, optional): Extraction radius.

    Returns:
        str: The CSV path.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame = pd.DataFrame(
        [
            {
                "x": atom.position[0],
                "y": atom.position[1],
                "z": atom.position[2],
                "charge": atom.label,
                "element": atom.element,
                "res_name": atom.res_name,
                "res_seq": atom.res_seq,
                "atom_name": atom.atom_name,
            }
            for atom in cloud.atoms
        ],
        columns=CLOUD_COLUMNS,
    )
    frame["res_seq"] = frame["res_seq"].astype("Int64")
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)

    sidecar = {
        "id": cloud.id,
        "ligand_class": cloud.ligand_class,
        "source_file": source_file,
        "cutoff_radius": cutoff_radius,
    }
    with open(sidecar_path(path), "w", encoding="utf-8") as handle:
        handle.write(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    logger.debug(f"Saved cloud {cloud.id} ({len(cloud)} atoms) to {path}")
    return path


def _text(value: Any) -> Optional[str]:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return str(value)


def load_cloud(path: str) -> Tuple[AtomCloud, Dict[str, Any]]:
    """
    Read a cloud CSV and its sidecar.

    Returns:
        Tuple[AtomCloud, Dict[str, Any]]: The cloud and the sidecar metadata
        (empty when the sidecar is absent; the id then defaults to the file stem).
    """
    if not os.path.isfile(path):
        raise InputError(f"Cloud file not found: {path}")
    meta: Dict[str, Any] = {}
    if os.path.isfile(sidecar_path(path)):
        with open(sidecar_path(path), "r", encoding="utf-8") as handle:
            meta = json.load(handle)

    frame = pd.read_csv(
        path,
        dtype={"element": str, "res_name": str, "atom_name": str},
        keep_default_na=False,
        na_values=[""],
    )
    missing = [column for column in ("x", "y", "z") if column not in frame.columns]
    if missing:
        raise InputError(f"Cloud file {path} lacks columns: {', '.join(missing)}")
    if frame.empty:
        raise InputError(f"Cloud file {path} has no atoms")

    atoms = []
    for row in frame.to_dict("records"):
        res_seq = row.get("res_seq")
        charge = row.get("charge", 0.0)
        atoms.append(Atom(
            position=(float(row["x"]), float(row["y"]), float(row["z"])),
            label=0.0 if charge is None or pd.isna(charge) else float(charge),
            element=_text(row.get("element")) or "",
            res_name=_text(row.get("res_name")),
            res_seq=None if res_seq is None or pd.isna(res_seq) else int(res_seq),
            atom_name=_text(row.get("atom_name")),
        ))
    cloud_id = meta.get("id") or os.path.splitext(os.path.basename(path))[0]
    return AtomCloud(id=cloud_id, atoms=atoms, ligand_class=meta.get("ligand_class")), meta


def list_cloud_files(directory: str) -> List[str]:
    """Cloud CSV files of a directory, sorted by name."""
    if not os.path.isdir(directory):
        raise InputError(f"Cloud directory not found: {directory}")
    files = sorted(
        os.path.join(directory, name) for name in os.listdir(directory) if name.lower().endswith(".csv")
    )
    if not files:
        raise InputError(f"No cloud files in {directory}")
    return files


def load_cloud_directory(directory: str) -> Dict[Optional[float], List[AtomCloud]]:
    """
    Load every cloud of a directory, grouped by the extraction radius of their sidecars.

    Within a group clouds are sorted by id; every group must list the same ids.

    Returns:
        Dict[Optional[float], List[AtomCloud]]: radius (None when unknown) -> clouds.
    """
    groups: Dict[Optional[float], List[AtomCloud]] = {}
    for path in list_cloud_files(directory):
        cloud, meta = load_cloud(path)
        radius = meta.get("cutoff_radius")
        groups.setdefault(None if radius is None else float(radius), []).append(cloud)

    reference: Optional[List[str]] = None
    for radius in groups:
        groups[radius].sort(key=lambda c: c.id)
        ids = [cloud.id for cloud in groups[radius]]
        if len(set(ids)) != len(ids):
            raise InputError(f"Duplicate cloud ids in {directory} at radius {radius}")
        if reference is None:
            reference = ids
        elif ids != reference:
            raise InputError(f"Clouds at radius {radius} in {directory} do not match the other radii")
    logger.info(f"Loaded {sum(len(g) for g in groups.values())} clouds from {directory} ({len(groups)} radii)")
    return dict(sorted(groups.items(), key=lambda item: (item[0] is None, item[0] or 0.0)))
