import numpy as np
import pytest

from schemas.cloud import AtomCloud
from utils.synthetic import random_cloud


def cloud_from(points, labels=None, cloud_id="cloud", ligand_class=None) -> AtomCloud:
    return AtomCloud.from_arrays(cloud_id, np.asarray(points, dtype=float), labels, ligand_class=ligand_class)


def pdb_line(record, serial, name, res_name, chain, res_seq, x, y, z, element, alt_loc=" "):
    """One fixed-column ATOM/HETATM record."""
    atom_name = name if len(name) == 4 else f" {name}"
    return (
        f"{record:<6}{serial:>5} {atom_name:<4}{alt_loc}{res_name:>3} {chain}{res_seq:>4}    "
        f"{x:>8.3f}{y:>8.3f}{z:>8.3f}{1.0:>6.2f}{20.0:>6.2f}          {element:>2}"
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cloud(rng):
    return random_cloud(rng, 8, box=4.0, cloud_id="small")


@pytest.fixture
def labelled_pair(rng):
    first = random_cloud(rng, 6, box=4.0, labelled=True, cloud_id="first")
    second = random_cloud(rng, 5, box=4.0, labelled=True, cloud_id="second")
    return first, second


@pytest.fixture
def box_corners():
    """8 corners of an axis-aligned box with half-extents (3, 2, 1)."""
    return np.array([[sx * 3.0, sy * 2.0, sz * 1.0] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)])


@pytest.fixture
def pocket_pdb_text():
    """
    Ligand ATP (chain A, 500) at the origin, protein atoms on the x axis at
    4.0, 5.2 and 5.4, an altLoc B copy, a hydrogen and a water.
    """
    lines = [
        "HEADER    TEST COMPLEX",
        pdb_line("ATOM", 1, "CA", "ALA", "A", 1, 4.0, 0.0, 0.0, "C"),
        pdb_line("ATOM", 2, "N", "GLY", "A", 2, 0.0, 5.2, 0.0, "N"),
        pdb_line("ATOM", 3, "CB", "ALA", "A", 1, 0.0, 0.0, 5.4, "C"),
        pdb_line("ATOM", 4, "CB", "SER", "A", 3, -4.5, 0.0, 0.0, "C", alt_loc="B"),
        pdb_line("ATOM", 5, "H", "ALA", "A", 1, 1.0, 1.0, 1.0, "H"),
        pdb_line("HETATM", 6, "PG", "ATP", "A", 500, 0.0, 0.0, 0.0, "P"),
        pdb_line("HETATM", 7, "O", "HOH", "A", 600, -1.0, -1.0, 0.0, "O"),
        "END",
    ]
    return "\n".join(lines) + "\n"
