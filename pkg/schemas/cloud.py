import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi

Vector3 = Tuple[float, float, float]


class Atom(BaseModel):
    """
    Pydantic schema for one atom of a cloud.
    Attributes:
        position (Vector3): Cartesian coordinates in Angstrom.
        label (float): Partial charge in elementary-charge units (0.0 allowed).
        element (str): Element symbol.
        res_name (str, optional): Residue name, informational.
        res_seq (int, optional): Residue number, informational.
        atom_name (str, optional): Atom name, informational.
        chain (str, optional): Chain identifier, informational.
    """
    position: Vector3
    label: float = 0.0
    element: str = ""
    res_name: Optional[str] = None
    res_seq: Optional[int] = None
    atom_name: Optional[str] = None
    chain: Optional[str] = None

    @field_validator("position")
    @classmethod
    def position_is_finite(cls, value: Vector3) -> Vector3:
        if not all(math.isfinite(c) for c in value):
            raise ValueError(f"non-finite atom position {value}")
        return value

    @field_validator("label")
    @classmethod
    def label_is_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"non-finite atom label {value}")
        return value


class AtomCloud(BaseModel):
    """
    Pydantic schema for a labelled 3D atom cloud (a pocket or a ligand).
    Attributes:
        id (str): Cloud identifier.
        atoms (List[Atom]): Ordered atoms, at least one, positions pairwise distinct.
        ligand_class (str, optional): Identity of the bound ligand, e.g. "ATP".
    """
    id: str
    atoms: List[Atom] = Field(min_length=1)
    ligand_class: Optional[str] = None

    @model_validator(mode="after")
    def positions_are_distinct(self) -> "AtomCloud":
        seen = set()
        for index, atom in enumerate(self.atoms):
            if atom.position in seen:
                raise ValueError(f"cloud {self.id}: duplicate atom position {atom.position} at index {index}")
            seen.add(atom.position)
        return self

    @property
    def positions(self) -> np.ndarray:
        """Atom coordinates as an (N, 3) array."""
        return np.array([atom.position for atom in self.atoms], dtype=float)

    @property
    def labels(self) -> np.ndarray:
        """Atom labels as an (N,) array."""
        return np.array([atom.label for atom in self.atoms], dtype=float)

    @property
    def is_labelled(self) -> bool:
        return any(atom.label != 0.0 for atom in self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    @classmethod
    def from_arrays(
        cls,
        cloud_id: str,
        positions,
        labels=None,
        ligand_class: Optional[str] = None,
        elements: Optional[List[str]] = None,
    ) -> "AtomCloud":
        """
        Build a cloud from coordinate (and optional label) arrays.

        Args:
            cloud_id (str): Cloud identifier.
            positions: (N, 3) coordinates.
            labels: (N,) labels, zeros when omitted.
            ligand_class (str, optional): Ligand class.
            elements (List[str], optional): Element symbols, "C" when omitted.

        Returns:
            AtomCloud: The new cloud.
        """
        coords = np.asarray(positions, dtype=float).reshape(-1, 3)
        values = np.zeros(len(coords)) if labels is None else np.asarray(labels, dtype=float)
        symbols = elements or ["C"] * len(coords)
        atoms = [
            Atom(position=(float(x), float(y), float(z)), label=float(l), element=e)
            for (x, y, z), l, e in zip(coords, values, symbols)
        ]
        return cls(id=cloud_id, atoms=atoms, ligand_class=ligand_class)


class RigidTransform(BaseModel):
    """
    Pydantic schema for a rigid motion y -> R(phi, theta, psi) y + translation.
    Attributes:
        phi (float): Rotation about X, radians in [0, 2pi).
        theta (float): Rotation about Y, radians in [0, 2pi).
        psi (float): Rotation about Z, radians in [0, 2pi).
        translation (Vector3): Translation in Angstrom.
    """
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    translation: Vector3 = (0.0, 0.0, 0.0)

    @field_validator("phi", "theta", "psi")
    @classmethod
    def wrap_angle(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"non-finite angle {value}")
        wrapped = value % TWO_PI
        # x % 2pi can round up to 2pi for tiny negative x
        return 0.0 if wrapped >= TWO_PI else wrapped

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    def as_vector(self) -> np.ndarray:
        """Parameters as (phi, theta, psi, tx, ty, tz)."""
        return np.array([self.phi, self.theta, self.psi, *self.translation], dtype=float)

    @classmethod
    def from_vector(cls, vector) -> "RigidTransform":
        v = [float(x) for x in vector]
        return cls(phi=v[0], theta=v[1], psi=v[2], translation=(v[3], v[4], v[5]))


class EllipsoidSummary(BaseModel):
    """
    Pydantic schema for the principal-axis ellipsoid of a cloud.
    Attributes:
        centroid (Vector3): Arithmetic mean of positions.
        axis_lengths (Vector3): Semi-axis lengths, sorted descending.
        axis_directions (List[Vector3]): Orthonormal, right-handed axis directions.
        volume (float): (4/3) pi prod(axis_lengths).
    """
    centroid: Vector3
    axis_lengths: Vector3
    axis_directions: List[Vector3]
    volume: float

    @model_validator(mode="after")
    def lengths_sorted(self) -> "EllipsoidSummary":
        a, b, c = self.axis_lengths
        if not (a >= b >= c >= 0.0):
            raise ValueError(f"axis lengths must be sorted descending and non-negative, got {self.axis_lengths}")
        return self
