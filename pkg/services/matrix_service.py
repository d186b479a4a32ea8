"""
All-pairs score matrices.

Base families (sup-CK, labelled sup-CK, sup-PI, Vol, Princ-Axis) are computed
pair by pair, in a worker pool when one is given, and memoised in a
ScoreCache keyed by (id_a, id_b, family, optimizer settings, radius). The combined
sup-CK-Vol measures are assembled from the cached base matrices.
"""
import logging
import threading
from concurrent.futures import Executor
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from core.dependencies import get_worker_pool
from core.exceptions import InputError
from schemas.cloud import AtomCloud
from schemas.params import AlignConfig, MeasureConfig, MeasureKind
from schemas.results import SimilarityMatrix
from utils.measures import compute_measure

logger = logging.getLogger(__name__)

SYMMETRIC_KINDS = {MeasureKind.VOL, MeasureKind.PRINC_AXIS}
CacheKey = Tuple[str, str, str, Optional[AlignConfig], Optional[float]]


class ScoreCache:
    """
    Thread-safe memo of pair scores.
    """

    def __init__(self):
        self._scores: Dict[Hashable, float] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(id_a: str, id_b: str, cfg: MeasureConfig, radius: Optional[float] = None) -> CacheKey:
        kind = cfg.kind
        if kind in SYMMETRIC_KINDS:
            id_a, id_b = min(id_a, id_b), max(id_a, id_b)
            return id_a, id_b, kind.value, None, radius
        family = kind.value if kind != MeasureKind.SUP_PI else f"{kind.value}@{cfg.overlap_tolerance}"
        return id_a, id_b, family, cfg.effective_align(), radius

    def get(self, key: Hashable) -> Optional[float]:
        with self._lock:
            return self._scores.get(key)

    def put(self, key: Hashable, score: float) -> None:
        with self._lock:
            self._scores.setdefault(key, score)

    def __len__(self) -> int:
        with self._lock:
            return len(self._scores)


def _score_pair(task: Tuple[AtomCloud, AtomCloud, MeasureConfig]) -> float:
    cloud1, cloud2, cfg = task
    return compute_measure(cloud1, cloud2, cfg)


def measure_params(cfg: MeasureConfig) -> Dict[str, Any]:
    """Parameters that define a measure, for matrix metadata and manifests."""
    params: Dict[str, Any] = {}
    if cfg.kind.uses_alignment:
        align = cfg.effective_align()
        params.update({
            "sigma": align.sigma,
            "lambda": align.lambda_,
            "max_iterations": align.max_iterations,
            "axis_similarity_ratio": align.axis_similarity_ratio,
            "extra_random_starts": align.extra_random_starts,
            "seed": align.seed,
        })
    if cfg.kind == MeasureKind.SUP_PI:
        params["overlap_tolerance"] = cfg.overlap_tolerance
    if cfg.kind.uses_volume:
        params["alpha"] = cfg.alpha
    return params


def _base_matrix(
    clouds: Sequence[AtomCloud],
    cfg: MeasureConfig,
    pool: Optional[Executor],
    cache: ScoreCache,
    radius: Optional[float],
) -> np.ndarray:
    n = len(clouds)
    if cfg.kind in SYMMETRIC_KINDS:
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(n)]

    scores = np.empty((n, n))
    pending: List[Tuple[int, int]] = []
    for i, j in pairs:
        cached = cache.get(ScoreCache.key(clouds[i].id, clouds[j].id, cfg, radius))
        if cached is None:
            pending.append((i, j))
        else:
            scores[i, j] = cached

    if pending:
        logger.info(f"Computing {len(pending)} {cfg.kind.value} pair scores ({len(pairs) - len(pending)} cached)")
        tasks = [(clouds[i], clouds[j], cfg) for i, j in pending]
        if pool is None:
            results = map(_score_pair, tasks)
        else:
            results = pool.map(_score_pair, tasks, chunksize=max(1, len(tasks) // 64))
        for (i, j), score in zip(pending, results):
            scores[i, j] = score
            cache.put(ScoreCache.key(clouds[i].id, clouds[j].id, cfg, radius), score)

    if cfg.kind in SYMMETRIC_KINDS:
        upper = np.triu(scores)
        scores = upper + np.triu(scores, 1).T
    return scores


def score_matrix(
    clouds: Sequence[AtomCloud],
    cfg: MeasureConfig,
    pool: Optional[Executor] = None,
    cache: Optional[ScoreCache] = None,
    radius: Optional[float] = None,
) -> np.ndarray:
    """
    Raw N x N scores; combined measures are sup-CK minus alpha times Vol.

    Args:
        clouds (Sequence[AtomCloud]): Items, row/column order.
        cfg (MeasureConfig): Measure.
        pool (Executor, optional): Worker pool for the pair scores.
        cache (ScoreCache, optional): Memo shared between calls.
        radius (float, optional): Extraction radius of the clouds (cache key).

    Returns:
        np.ndarray: scores[i, j] = measure(clouds[i], clouds[j]).
    """
    cache = cache if cache is not None else ScoreCache()
    if not cfg.kind.uses_volume:
        return _base_matrix(clouds, cfg, pool, cache, radius)

    ck_kind = MeasureKind.SUP_CK_L if cfg.kind.uses_labels else MeasureKind.SUP_CK
    ck = _base_matrix(clouds, cfg.model_copy(update={"kind": ck_kind}), pool, cache, radius)
    if cfg.alpha == 0:
        return ck
    vol = _base_matrix(clouds, cfg.model_copy(update={"kind": MeasureKind.VOL}), pool, cache, radius)
    return ck - cfg.alpha * vol


def check_unique_ids(clouds: Sequence[AtomCloud]) -> None:
    ids = [cloud.id for cloud in clouds]
    if len(set(ids)) != len(ids):
        raise InputError("cloud ids must be unique")


def similarity_matrix(
    clouds: Sequence[AtomCloud],
    cfg: MeasureConfig,
    jobs: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
    symmetrize: bool = False,
    radius: Optional[float] = None,
    pool: Optional[Executor] = None,
) -> SimilarityMatrix:
    """
    All-pairs matrix of a measure, diagonal included.

    Args:
        clouds (Sequence[AtomCloud]): Items with unique ids.
        cfg (MeasureConfig): Measure and its parameters.
        jobs (int, optional): Worker processes when no pool is given.
        cache (ScoreCache, optional): Memo shared between calls.
        symmetrize (bool): Replace M by (M + M^T) / 2.
        radius (float, optional): Extraction radius, recorded in params.
        pool (Executor, optional): Existing worker pool.

    Returns:
        SimilarityMatrix: Scores with ids, classes and orientation.
    """
    if not clouds:
        raise InputError("no clouds to compare")
    check_unique_ids(clouds)
    if pool is None:
        with get_worker_pool(jobs) as own_pool:
            scores = score_matrix(clouds, cfg, own_pool, cache, radius)
    else:
        scores = score_matrix(clouds, cfg, pool, cache, radius)
    if symmetrize:
        scores = (scores + scores.T) / 2.0

    params = measure_params(cfg)
    if radius is not None:
        params["radius"] = radius
    return SimilarityMatrix.from_array(
        [cloud.id for cloud in clouds],
        [cloud.ligand_class or "" for cloud in clouds],
        scores,
        cfg.orientation,
        measure=cfg.kind.value,
        params=params,
        symmetrized=symmetrize,
    )


def off_diagonal(scores: np.ndarray) -> np.ndarray:
    return scores[~np.eye(len(scores), dtype=bool)]

