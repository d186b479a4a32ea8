"""
Structure parsing and pocket extraction.

Reads the ATOM/HETATM subset of the fixed-column crystallographic format
(first model only, heavy atoms only, altLoc blank or 'A'), cuts pockets of
protein atoms strictly closer than a cutoff radius to a ligand, and labels
their atoms with partial charges from a (residue name, atom name) table.
"""
import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from core.constants import WATER_RESIDUES
from core.exceptions import (
    ChargeAssignmentError,
    ExtractionError,
    InputError,
    LigandResolutionError,
    StructureParseError,
)
from schemas.cloud import Atom, AtomCloud
from schemas.params import ExtractionConfig, MissingChargePolicy
from schemas.structure import HetKey, Structure

logger = logging.getLogger(__name__)

CHARGE_TABLE_COLUMNS = ("res_name", "atom_name", "charge")
HYDROGEN_ELEMENTS = {"H", "D"}
ACCEPTED_ALT_LOCS = {" ", "A"}


def _element_of(line: str, atom_name: str) -> str:
    element = line[76:78].strip().upper()
    if element:
        return element
    # columns 77-78 missing: first letters of the atom name
    letters = "".join(ch for ch in atom_name if ch.isalpha())
    return letters[:1].upper()


def _parse_atom_line(line: str, line_number: int) -> Tuple[Atom, str]:
    padded = line.rstrip("\n").ljust(80)
    atom_name = padded[12:16].strip()
    try:
        x = float(padded[30:38])
        y = float(padded[38:46])
        z = float(padded[46:54])
    except ValueError:
        raise StructureParseError(f"malformed coordinates {padded[30:54]!r}", line_number)
    try:
        res_seq = int(padded[22:26])
    except ValueError:
        raise StructureParseError(f"malformed residue number {padded[22:26]!r}", line_number)

    atom = Atom(
        position=(x, y, z),
        element=_element_of(padded, atom_name),
        res_name=padded[17:20].strip(),
        res_seq=res_seq,
        atom_name=atom_name,
        chain=padded[21].strip(),
    )
    return atom, padded[16]


def parse_structure(text: str, source: Optional[str] = None) -> Structure:
    """
    Parse structure-file text into protein atoms and het groups.

    Args:
        text (str): File contents.
        source (str, optional): Name recorded on the structure.

    Returns:
        Structure: Atoms in file order.

    Raises:
        StructureParseError: Malformed coordinates (with line number) or no atoms.
    """
    protein_atoms: List[Atom] = []
    het_groups: Dict[HetKey, List[Atom]] = {}
    seen_model = False

    for line_number, line in enumerate(text.splitlines(), start=1):
        record = line[:6]
        if record == "MODEL ":
            if seen_model:
                break
            seen_model = True
            continue
        if record == "ENDMDL":
            break
        if record not in ("ATOM  ", "HETATM"):
            continue

        atom, alt_loc = _parse_atom_line(line, line_number)
        if alt_loc not in ACCEPTED_ALT_LOCS or atom.element in HYDROGEN_ELEMENTS:
            continue
        if record == "ATOM  ":
            protein_atoms.append(atom)
        else:
            het_groups.setdefault((atom.res_name, atom.chain, atom.res_seq), []).append(atom)

    if not protein_atoms and not het_groups:
        raise StructureParseError(f"no atoms in structure {source or ''}".rstrip())
    return Structure(source=source, protein_atoms=protein_atoms, het_groups=het_groups)


def load_charge_table(path: str) -> Dict[Tuple[str, str], float]:
    """
    Read a partial-charge table CSV with header res_name,atom_name,charge.

    Args:
        path (str): CSV path.

    Returns:
        Dict[Tuple[str, str], float]: (residue name, atom name) -> charge.
    """
    if not os.path.isfile(path):
        raise InputError(f"Charge table not found: {path}")
    frame = pd.read_csv(
        path, dtype={"res_name": str, "atom_name": str}, comment="#", keep_default_na=False, na_values=[""]
    )
    missing = [column for column in CHARGE_TABLE_COLUMNS if column not in frame.columns]
    if missing:
        raise InputError(f"Charge table {path} lacks columns: {', '.join(missing)}")
    if frame["charge"].isna().any():
        raise InputError(f"Charge table {path} has empty charge values")

    table = {
        (str(res).strip(), str(atom).strip()): float(charge)
        for res, atom, charge in frame[list(CHARGE_TABLE_COLUMNS)].itertuples(index=False)
    }
    logger.debug(f"Loaded {len(table)} partial charges from {path}")
    return table


def _format_key(key: HetKey) -> str:
    code, chain, res_seq = key
    return f"{code}:{chain or '-'}:{res_seq}"


def resolve_ligand(
    structure: Structure, code: str, chain: Optional[str] = None, res_seq: Optional[int] = None
) -> HetKey:
    """
    Key of the unique het group matching the code (and optional chain / residue number).

    Raises:
        LigandResolutionError: Unknown code, or several matching groups.
    """
    matches = structure.groups_for(code, chain, res_seq)
    if not matches:
        raise LigandResolutionError(f"Ligand {code} not found", structure.het_codes())
    if len(matches) > 1:
        raise LigandResolutionError(
            f"Ligand {code} is ambiguous, specify the chain or residue number",
            [_format_key(key) for key in matches],
        )
    return matches[0]


def _structure_name(structure: Structure) -> str:
    if not structure.source:
        return "structure"
    return os.path.splitext(os.path.basename(structure.source))[0]


def _candidate_atoms(structure: Structure, ligand_key: HetKey, cfg: ExtractionConfig) -> List[Atom]:
    atoms = list(structure.protein_atoms)
    if cfg.include_hetero:
        for key, group in structure.het_groups.items():
            if key == ligand_key:
                continue
            if key[0] in WATER_RESIDUES and not cfg.include_water:
                continue
            atoms.extend(group)
    return atoms


def _assign_charges(atoms: List[Atom], cfg: ExtractionConfig) -> List[Atom]:
    labelled: List[Atom] = []
    missing: List[Tuple[str, str]] = []
    for atom in atoms:
        key = (atom.res_name or "", atom.atom_name or "")
        charge = cfg.charge_table.get(key)
        if charge is None:
            if key not in missing:
                missing.append(key)
            if cfg.missing_charge_policy == MissingChargePolicy.SKIP:
                continue
            charge = 0.0
        labelled.append(atom.model_copy(update={"label": charge}))

    if missing:
        if cfg.missing_charge_policy == MissingChargePolicy.ERROR:
            raise ChargeAssignmentError(missing)
        if cfg.charge_table:
            logger.warning(
                f"{len(missing)} (residue, atom) pairs without charge, policy {cfg.missing_charge_policy.value}"
            )
    return labelled


def extract_pocket(structure: Structure, cfg: ExtractionConfig, cloud_id: Optional[str] = None) -> AtomCloud:
    """
    Atoms strictly closer than ``cfg.cutoff_radius`` to any atom of the ligand.

    Args:
        structure (Structure): Parsed complex.
        cfg (ExtractionConfig): Ligand selection, radius and charge policy.
        cloud_id (str, optional): Identifier of the pocket.

    Returns:
        AtomCloud: Labelled pocket with ``ligand_class`` set to the het code.

    Raises:
        LigandResolutionError: Unknown or ambiguous ligand.
        ExtractionError: Empty pocket.
        ChargeAssignmentError: Missing charges under the ``error`` policy.
    """
    ligand_key = resolve_ligand(structure, cfg.ligand_code, cfg.ligand_chain, cfg.ligand_res_seq)
    ligand_positions = np.array([atom.position for atom in structure.het_groups[ligand_key]], dtype=float)
    candidates = _candidate_atoms(structure, ligand_key, cfg)
    if not candidates:
        raise ExtractionError(f"No candidate pocket atoms in {_structure_name(structure)}")

    positions = np.array([atom.position for atom in candidates], dtype=float)
    nearest = cdist(positions, ligand_positions).min(axis=1)
    selected = [atom for atom, distance in zip(candidates, nearest) if distance < cfg.cutoff_radius]
    if not selected:
        raise ExtractionError(
            f"Empty pocket around {_format_key(ligand_key)} at radius {cfg.cutoff_radius}"
        )

    atoms = _assign_charges(selected, cfg)
    if not atoms:
        raise ExtractionError(f"Every pocket atom around {_format_key(ligand_key)} lacks a charge")
    return AtomCloud(
        id=cloud_id or f"{_structure_name(structure)}_{cfg.ligand_code}",
        atoms=atoms,
        ligand_class=cfg.ligand_code,
    )


def cloud_at_radius(structure: Structure, cfg: ExtractionConfig, radius: float,
                    cloud_id: Optional[str] = None) -> AtomCloud:
    """Pocket extracted at another cutoff radius with otherwise identical settings."""
    return extract_pocket(structure, cfg.model_copy(update={"cutoff_radius": radius}), cloud_id)


def extract_ligand(
    structure: Structure,
    code: str,
    chain: Optional[str] = None,
    res_seq: Optional[int] = None,
    cloud_id: Optional[str] = None,
) -> AtomCloud:
    """
    Cloud of the ligand's own atoms, labels 0.

    Raises:
        LigandResolutionError: Unknown code or a group present on several chains.
    """
    key = resolve_ligand(structure, code, chain, res_seq)
    atoms = [atom.model_copy(update={"label": 0.0}) for atom in structure.het_groups[key]]
    return AtomCloud(id=cloud_id or f"{_structure_name(structure)}_{code}_ligand", atoms=atoms, ligand_class=code)
