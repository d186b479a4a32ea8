"""
Baseline and combined similarity measures between atom clouds.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from core.exceptions import ParameterError
from schemas.cloud import AtomCloud
from schemas.params import MeasureConfig, MeasureKind
from schemas.results import AlignResult
from utils.align import gradient_ascent, sup_ck
from utils.geometry import apply_transform, ellipsoid_summary

logger = logging.getLogger(__name__)


def vol_score(cloud1: AtomCloud, cloud2: AtomCloud) -> float:
    """Absolute difference of the ellipsoid volumes; a dissimilarity."""
    return abs(ellipsoid_summary(cloud1).volume - ellipsoid_summary(cloud2).volume)


def princ_axis_score(cloud1: AtomCloud, cloud2: AtomCloud) -> float:
    """Sum of squared differences of the sorted semi-axis lengths; a dissimilarity."""
    lengths1 = np.asarray(ellipsoid_summary(cloud1).axis_lengths)
    lengths2 = np.asarray(ellipsoid_summary(cloud2).axis_lengths)
    return float(np.sum((lengths1 - lengths2) ** 2))


def overlap_count(x: np.ndarray, y: np.ndarray, tolerance: float) -> int:
    """
    Size of a maximum one-to-one matching between rows of x and rows of y
    over the pairs at distance <= tolerance.

    Args:
        x (np.ndarray): (N1, 3) positions.
        y (np.ndarray): (N2, 3) positions.
        tolerance (float): Overlap distance, > 0.

    Returns:
        int: Number of overlapping atom pairs.
    """
    if not tolerance > 0:
        raise ParameterError(f"overlap tolerance must be > 0, got {tolerance}")
    close = cdist(x, y) <= tolerance
    if not close.any():
        return 0
    matching = maximum_bipartite_matching(csr_matrix(close.astype(np.int8)), perm_type="column")
    return int(np.count_nonzero(matching >= 0))


def poisson_index(overlaps: int, n1: int, n2: int) -> float:
    """L / (N1 + N2 - L)."""
    return overlaps / (n1 + n2 - overlaps)


def _refine_overlap(cloud1: AtomCloud, cloud2: AtomCloud, start: AlignResult, cfg: MeasureConfig) -> AlignResult:
    sharp = cfg.align.model_copy(update={"sigma": cfg.overlap_tolerance / 2.0, "lambda_": math.inf})
    return gradient_ascent(cloud1, cloud2, start.transform, sharp)


def sup_pi(cloud1: AtomCloud, cloud2: AtomCloud, cfg: Optional[MeasureConfig] = None) -> float:
    """
    Poisson index after sup-CK superposition and overlap refinement.

    The sup-CK transform is refined by gradient ascent on a sharp kernel
    (sigma = tolerance / 2, labels ignored); the larger of the two overlap
    counts is kept.

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        cfg (MeasureConfig, optional): Align settings and overlap tolerance.

    Returns:
        float: PI in [0, 1].
    """
    cfg = cfg or MeasureConfig(kind=MeasureKind.SUP_PI)
    aligned = sup_ck(cloud1, cloud2, cfg.align.model_copy(update={"lambda_": math.inf}))
    refined = _refine_overlap(cloud1, cloud2, aligned, cfg)

    x = cloud1.positions
    overlaps = max(
        overlap_count(x, apply_transform(cloud2.positions, aligned.transform), cfg.overlap_tolerance),
        overlap_count(x, apply_transform(cloud2.positions, refined.transform), cfg.overlap_tolerance),
    )
    return poisson_index(overlaps, len(cloud1), len(cloud2))


def combined_ck_vol(cloud1: AtomCloud, cloud2: AtomCloud, cfg: Optional[MeasureConfig] = None) -> float:
    """
    sup-CK minus alpha times Vol; labelled sup-CK for the SUP_CK_L_VOL kind.
    """
    cfg = cfg or MeasureConfig(kind=MeasureKind.SUP_CK_VOL)
    if cfg.alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {cfg.alpha}")
    score = sup_ck(cloud1, cloud2, cfg.effective_align()).score
    if cfg.alpha == 0:
        return score
    return score - cfg.alpha * vol_score(cloud1, cloud2)


def compute_measure(cloud1: AtomCloud, cloud2: AtomCloud, cfg: MeasureConfig) -> float:
    """
    Score of one pair under any measure kind.

    Args:
        cloud1 (AtomCloud): First cloud.
        cloud2 (AtomCloud): Second (moving) cloud.
        cfg (MeasureConfig): Measure kind and its settings.

    Returns:
        float: Similarity or dissimilarity, see ``cfg.orientation``.
    """
    kind = cfg.kind
    if kind == MeasureKind.VOL:
        return vol_score(cloud1, cloud2)
    if kind == MeasureKind.PRINC_AXIS:
        return princ_axis_score(cloud1, cloud2)
    if kind == MeasureKind.SUP_PI:
        return sup_pi(cloud1, cloud2, cfg)
    if kind.uses_volume:
        return combined_ck_vol(cloud1, cloud2, cfg)
    return sup_ck(cloud1, cloud2, cfg.effective_align()).score


def alpha_normalization(ck_scores, vol_scores) -> float:
    """
    Scale median(sup-CK) / median(Vol) that turns alpha multipliers into coefficients.

    Returns 1.0 when the Vol median is zero or either median is not finite.
    """
    ck_median = float(np.median(np.asarray(ck_scores, dtype=float)))
    vol_median = float(np.median(np.asarray(vol_scores, dtype=float)))
    if vol_median == 0 or not math.isfinite(ck_median) or not math.isfinite(vol_median):
        logger.warning(f"Degenerate alpha normalization (ck median {ck_median}, vol median {vol_median}), using 1.0")
        return 1.0
    return ck_median / vol_median
