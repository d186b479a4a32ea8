"""
Synthetic atom-cloud datasets with planted classes.

Each class has a random template; members are rigidly moved copies of it
with optional Gaussian jitter. Templates of class c are rescaled so that their
ellipsoid volume is base_volume * (1 + scale_step * c)^3, which keeps classes
apart for every measure, Vol included.
"""
import logging
from typing import List, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from schemas.cloud import AtomCloud
from utils.geometry import ellipsoid_summary, transform_cloud, transform_from_matrix

logger = logging.getLogger(__name__)


def random_cloud(
    rng: np.random.Generator,
    n_atoms: int,
    box: float = 10.0,
    labelled: bool = False,
    cloud_id: str = "cloud",
    ligand_class: Optional[str] = None,
) -> AtomCloud:
    """Uniform random positions in a cube of side ``box``; charges ~ N(0, 0.3) when labelled."""
    positions = rng.uniform(0.0, box, size=(n_atoms, 3))
    labels = rng.normal(0.0, 0.3, size=n_atoms) if labelled else None
    return AtomCloud.from_arrays(cloud_id, positions, labels, ligand_class=ligand_class)


def random_rigid_motion(rng: np.random.Generator, shift: float = 10.0):
    """Uniform random rotation with a translation drawn from [-shift, shift]^3."""
    rotation = Rotation.random(None, rng).as_matrix()
    return transform_from_matrix(rotation, rng.uniform(-shift, shift, size=3))


def rigid_copy(
    cloud: AtomCloud,
    rng: np.random.Generator,
    jitter: float = 0.0,
    shift: float = 10.0,
    cloud_id: Optional[str] = None,
) -> AtomCloud:
    """
    Randomly moved copy of a cloud, each coordinate perturbed by N(0, jitter).

    Args:
        cloud (AtomCloud): Template.
        rng (np.random.Generator): Random source.
        jitter (float): Standard deviation of the coordinate noise, Angstrom.
        shift (float): Translation range.
        cloud_id (str, optional): Identifier of the copy.

    Returns:
        AtomCloud: The copy, same labels and class.
    """
    moved = transform_cloud(cloud, random_rigid_motion(rng, shift), cloud_id)
    if jitter <= 0:
        return moved
    positions = moved.positions + rng.normal(0.0, jitter, size=moved.positions.shape)
    return AtomCloud.from_arrays(
        moved.id,
        positions,
        moved.labels,
        ligand_class=moved.ligand_class,
        elements=[atom.element for atom in moved.atoms],
    )


def _scaled_template(cloud: AtomCloud, target_volume: float) -> AtomCloud:
    volume = ellipsoid_summary(cloud).volume
    centroid = cloud.positions.mean(axis=0)
    factor = (target_volume / volume) ** (1.0 / 3.0)
    positions = centroid + (cloud.positions - centroid) * factor
    return AtomCloud.from_arrays(cloud.id, positions, cloud.labels, ligand_class=cloud.ligand_class)


def planted_classes(
    n_classes: int,
    per_class: int,
    n_atoms: int = 20,
    jitter: float = 0.05,
    scale_step: float = 0.35,
    base_volume: float = 400.0,
    labelled: bool = False,
    seed: int = 0,
) -> List[AtomCloud]:
    """
    A dataset of ``n_classes`` x ``per_class`` clouds, class-major order.

    Class names are "C00", "C01", ...; cloud ids are "<class>_<member>".
    """
    rng = np.random.default_rng(seed)
    clouds: List[AtomCloud] = []
    for c in range(n_classes):
        name = f"C{c:02d}"
        template = random_cloud(rng, n_atoms, labelled=labelled, cloud_id=name, ligand_class=name)
        template = _scaled_template(template, base_volume * (1.0 + scale_step * c) ** 3)
        for member in range(per_class):
            clouds.append(rigid_copy(template, rng, jitter=jitter, cloud_id=f"{name}_{member:02d}"))
    logger.debug(f"Generated {len(clouds)} synthetic clouds in {n_classes} classes")
    return clouds
