"""
Double cross-validation and parameter sweeps over cloud sets.

Matrices for every grid point are computed once (one worker pool, one score
cache for the whole run) and handed to the pure evaluation routines.
"""
import logging
import math
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.dependencies import get_worker_pool
from core.exceptions import InputError, ParameterError
from middleware.logging import StageTimer
from schemas.cloud import AtomCloud
from schemas.params import AlignConfig, HyperGrid, MeasureConfig, MeasureKind, ParamPoint
from schemas.results import EvalReport, SimilarityMatrix
from services.matrix_service import ScoreCache, check_unique_ids, off_diagonal, score_matrix, similarity_matrix
from utils.evaluation import auc_report, double_cv_from_matrices
from utils.measures import alpha_normalization

logger = logging.getLogger(__name__)

CloudSets = Union[Sequence[AtomCloud], Mapping[Optional[float], Sequence[AtomCloud]]]


def _by_radius(pockets: CloudSets) -> Dict[Optional[float], List[AtomCloud]]:
    if isinstance(pockets, Mapping):
        groups = {radius: list(clouds) for radius, clouds in pockets.items()}
    else:
        groups = {None: list(pockets)}
    if not groups or not any(groups.values()):
        raise InputError("no pockets to evaluate")
    reference = None
    for radius, clouds in groups.items():
        check_unique_ids(clouds)
        ids = [cloud.id for cloud in clouds]
        if reference is None:
            reference = ids
        elif ids != reference:
            raise InputError(f"pockets at radius {radius} do not match the other radii")
    return groups


def check_classes(clouds: Sequence[AtomCloud]) -> List[str]:
    """
    Ligand classes of the items; fails before any scoring when they cannot support evaluation.
    """
    unnamed = [cloud.id for cloud in clouds if not cloud.ligand_class]
    if unnamed:
        raise InputError(f"{len(unnamed)} clouds without ligand class, e.g. {unnamed[0]}")
    classes = [cloud.ligand_class for cloud in clouds]
    if len(set(classes)) < 2:
        raise InputError("evaluation needs at least two ligand classes")
    return classes


def _kernel_settings(kind: MeasureKind, grid: HyperGrid) -> List[Tuple[Optional[float], Optional[float]]]:
    if not kind.uses_alignment:
        return [(None, None)]
    lambdas = grid.lambda_values if kind.uses_labels else [math.inf]
    return [(sigma, lam) for sigma in grid.sigma_values for lam in lambdas]


def grid_candidates(
    pockets: CloudSets,
    kind: MeasureKind,
    grid: HyperGrid,
    base: Optional[MeasureConfig] = None,
    pool=None,
    cache: Optional[ScoreCache] = None,
) -> List[Tuple[ParamPoint, SimilarityMatrix]]:
    """
    One matrix per (radius, sigma, lambda, alpha) grid point, in grid order.

    For the combined measures alpha is the multiplier times
    median(sup-CK) / median(Vol) of the off-diagonal scores at that point.
    """
    base = base or MeasureConfig(kind=kind)
    cache = cache if cache is not None else ScoreCache()
    candidates: List[Tuple[ParamPoint, SimilarityMatrix]] = []

    for radius, clouds in _by_radius(pockets).items():
        ids = [cloud.id for cloud in clouds]
        classes = [cloud.ligand_class or "" for cloud in clouds]
        for sigma, lam in _kernel_settings(kind, grid):
            align = base.align
            if sigma is not None:
                align = align.model_copy(update={"sigma": sigma, "lambda_": lam})
            cfg = base.model_copy(update={"kind": kind, "align": align, "alpha": 0.0})

            if not kind.uses_volume:
                scores = score_matrix(clouds, cfg, pool, cache, radius)
                point = ParamPoint(sigma=sigma, lambda_=lam, radius=radius)
                candidates.append((point, SimilarityMatrix.from_array(
                    ids, classes, scores, kind.orientation, measure=kind.value, params=point.as_record())))
                continue

            ck = score_matrix(clouds, cfg, pool, cache, radius)
            vol = score_matrix(clouds, cfg.model_copy(update={"kind": MeasureKind.VOL}), pool, cache, radius)
            scale = alpha_normalization(off_diagonal(ck), off_diagonal(vol))
            for multiplier in grid.alpha_values:
                alpha = multiplier * scale
                point = ParamPoint(sigma=sigma, lambda_=lam, radius=radius, alpha=alpha)
                candidates.append((point, SimilarityMatrix.from_array(
                    ids, classes, ck - alpha * vol, kind.orientation, measure=kind.value,
                    params=point.as_record())))
    return candidates


def loo_double_cv(
    pockets: CloudSets,
    measure_kind: MeasureKind,
    grid: Optional[HyperGrid] = None,
    base: Optional[MeasureConfig] = None,
    jobs: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
    timer: Optional[StageTimer] = None,
) -> EvalReport:
    """
    Leave-one-out double cross-validation of a measure.

    Args:
        pockets (CloudSets): Clouds, or radius -> clouds with identical ids per radius.
        measure_kind (MeasureKind): Measure to evaluate.
        grid (HyperGrid, optional): k, sigma, lambda and alpha grids.
        base (MeasureConfig, optional): Optimizer settings and overlap tolerance.
        jobs (int, optional): Worker processes.
        cache (ScoreCache, optional): Memo shared between calls.
        timer (StageTimer, optional): Receives stage timings.

    Returns:
        EvalReport: Predictions, per-query AUC, classification error and chosen parameters.
    """
    grid = grid or HyperGrid()
    timer = timer or StageTimer()
    groups = _by_radius(pockets)
    classes = check_classes(next(iter(groups.values())))

    with timer.stage("matrices"):
        with get_worker_pool(jobs) as pool:
            candidates = grid_candidates(groups, measure_kind, grid, base, pool, cache)
    with timer.stage("double_cv"):
        return double_cv_from_matrices(
            candidates, grid.k_values, classes=classes, measure=measure_kind.value, seed=grid.seed
        )


def sweep(
    pockets: Sequence[AtomCloud],
    measure_kind: MeasureKind,
    grid: Optional[HyperGrid] = None,
    base: Optional[MeasureConfig] = None,
    jobs: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
    timer: Optional[StageTimer] = None,
) -> List[Dict[str, Any]]:
    """
    Mean AUC and double-CV classification error for every (sigma, lambda).

    k is selected by inner cross-validation at each point; alpha is fixed at 0.

    Returns:
        List[Dict[str, Any]]: Rows sigma, lambda, mean_auc, auc_std, classification_error.
    """
    if not measure_kind.uses_alignment:
        raise ParameterError(f"sweep needs a kernel measure, got {measure_kind.value}")
    grid = grid or HyperGrid()
    timer = timer or StageTimer()
    clouds = list(pockets)
    check_unique_ids(clouds)
    classes = check_classes(clouds)
    base = base or MeasureConfig(kind=measure_kind)
    cache = cache if cache is not None else ScoreCache()

    rows: List[Dict[str, Any]] = []
    with get_worker_pool(jobs) as pool:
        for sigma, lam in _kernel_settings(measure_kind, grid):
            align: AlignConfig = base.align.model_copy(update={"sigma": sigma, "lambda_": lam})
            cfg = base.model_copy(update={"kind": measure_kind, "align": align, "alpha": 0.0})
            with timer.stage(f"sigma={sigma:g},lambda={lam:g}"):
                matrix = similarity_matrix(clouds, cfg, jobs=jobs, cache=cache, pool=pool)
                aucs = auc_report(matrix)
                report = double_cv_from_matrices(
                    [(ParamPoint(sigma=sigma, lambda_=lam), matrix)],
                    grid.k_values,
                    classes=classes,
                    measure=measure_kind.value,
                    seed=grid.seed,
                )
            rows.append({
                "sigma": sigma,
                "lambda": lam,
                "mean_auc": aucs.mean_auc if aucs.mean_auc is not None else np.nan,
                "auc_std": aucs.auc_std if aucs.auc_std is not None else np.nan,
                "classification_error": report.classification_error,
            })
            logger.info(f"Sweep sigma={sigma} lambda={lam}: {rows[-1]}")
    return rows
