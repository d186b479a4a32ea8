from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from schemas.cloud import Atom, AtomCloud

# (het code, chain, residue number)
HetKey = Tuple[str, str, int]


class Structure(BaseModel):
    """
    Pydantic schema for a parsed structure file (first model only).
    Attributes:
        source (str, optional): File the structure was read from.
        protein_atoms (List[Atom]): ATOM records in file order.
        het_groups (Dict[HetKey, List[Atom]]): HETATM records grouped by residue.
    """
    source: Optional[str] = None
    protein_atoms: List[Atom] = Field(default_factory=list)
    het_groups: Dict[HetKey, List[Atom]] = Field(default_factory=dict)

    def het_codes(self) -> List[str]:
        """Distinct het codes in file order."""
        codes: List[str] = []
        for code, _, _ in self.het_groups:
            if code not in codes:
                codes.append(code)
        return codes

    def groups_for(self, code: str, chain: Optional[str] = None, res_seq: Optional[int] = None) -> List[HetKey]:
        """Keys of het groups matching a code and optional chain / residue number."""
        return [
            key for key in self.het_groups
            if key[0] == code
            and (chain is None or key[1] == chain)
            and (res_seq is None or key[2] == res_seq)
        ]


class ExtractionRecord(BaseModel):
    """
    Pydantic schema for one cloud produced by batch extraction.
    Attributes:
        source (str): Structure file.
        cloud (AtomCloud): Extracted pocket or ligand cloud.
        cutoff_radius (float, optional): Radius of a pocket; None for ligand clouds.
        structure_atoms (int): Heavy protein atoms in the structure.
    """
    source: str
    cloud: AtomCloud
    cutoff_radius: Optional[float] = None
    structure_atoms: int = 0
