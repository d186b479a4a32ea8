"""
Kernel PCA on a possibly indefinite similarity matrix.
"""
import logging

import numpy as np
from scipy.linalg import eigh

from core.constants import EIGENVALUE_RELATIVE_TOLERANCE
from core.exceptions import ParameterError
from schemas.params import Orientation
from schemas.results import Projection, SimilarityMatrix

logger = logging.getLogger(__name__)


def double_center(scores: np.ndarray) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    return scores - scores.mean(axis=0, keepdims=True) - scores.mean(axis=1, keepdims=True) + scores.mean()


def kpca_project(matrix: SimilarityMatrix, components: int = 2) -> Projection:
    """
    Project items on the components of the largest positive eigenvalues.

    The matrix is averaged with its transpose and double-centered; negative
    eigenvalues are dropped and their share of the spectrum is reported.
    Each component is signed so that its largest-magnitude coordinate is positive.

    Args:
        matrix (SimilarityMatrix): Similarity-oriented scores.
        components (int): Number of components d wanted.

    Returns:
        Projection: Coordinates eigenvector * sqrt(eigenvalue), at most d columns.

    Raises:
        ParameterError: Dissimilarity input or d < 1.
    """
    if components < 1:
        raise ParameterError(f"number of components must be >= 1, got {components}")
    if matrix.orientation != Orientation.SIMILARITY:
        raise ParameterError("kernel PCA needs a similarity matrix")

    scores = matrix.array()
    symmetrized = not np.array_equal(scores, scores.T)
    centered = double_center((scores + scores.T) / 2.0)

    values, vectors = eigh(centered)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    tolerance = EIGENVALUE_RELATIVE_TOLERANCE * scale
    significant = np.abs(values) > tolerance
    total_mass = float(np.abs(values[significant]).sum())
    negative_mass = float(np.abs(values[values < -tolerance]).sum())

    positive = np.flatnonzero(values > tolerance)[::-1]
    kept = positive[:components]
    coordinates = vectors[:, kept] * np.sqrt(values[kept])
    for column in range(coordinates.shape[1]):
        pivot = np.argmax(np.abs(coordinates[:, column]))
        if coordinates[pivot, column] < 0:
            coordinates[:, column] = -coordinates[:, column]

    fewer = len(kept) < components
    if fewer:
        logger.warning(f"Only {len(kept)} positive eigenvalues, {components} components requested")
    return Projection(
        ids=matrix.ids,
        classes=matrix.classes,
        coordinates=coordinates.tolist(),
        eigenvalues=[float(v) for v in values[kept]],
        discarded_negative_mass=negative_mass / total_mass if total_mass > 0 else 0.0,
        requested_components=components,
        fewer_components=fewer,
        symmetrized=symmetrized,
        centered=True,
    )
