"""
Evaluation of similarity matrices.

Per-query AUC by the Mann-Whitney statistic, rank-based KNN prediction and
leave-one-out double cross-validation over precomputed matrices. Every
routine works on the oriented score (similarity as is, dissimilarity negated),
so ranking is always descending and the diagonal never takes part.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from core.exceptions import ComputationError, InputError, ParameterError
from schemas.params import Orientation, ParamPoint
from schemas.results import AucReport, EvalReport, SimilarityMatrix

logger = logging.getLogger(__name__)

AUC_PROTOCOL = "per-query AUC on the full matrix at the parameters selected for that query"


def oriented_scores(matrix: SimilarityMatrix) -> np.ndarray:
    """Scores turned into similarities (larger = closer)."""
    scores = matrix.array()
    return scores if matrix.orientation == Orientation.SIMILARITY else -scores


def _auc_from_row(similarities: np.ndarray, classes: Sequence[str], query: int) -> Optional[float]:
    others = [j for j in range(len(classes)) if j != query]
    positive = np.array([classes[j] == classes[query] for j in others])
    n_pos = int(positive.sum())
    n_neg = len(others) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(similarities[others])
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auc_for_query(matrix: SimilarityMatrix, query: int) -> Optional[float]:
    """
    AUC of ranking every other item against ``query`` (same class = positive).

    Args:
        matrix (SimilarityMatrix): Scores and classes.
        query (int): Row index of the query.

    Returns:
        float or None: AUC in [0, 1]; ties count 1/2. None when the query has
        no positive or no negative among the other items.
    """
    if not 0 <= query < len(matrix):
        raise ParameterError(f"query index {query} outside 0..{len(matrix) - 1}")
    return _auc_from_row(oriented_scores(matrix)[query], matrix.classes, query)


def _summary(values: Sequence[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    defined = [v for v in values if v is not None]
    if not defined:
        return None, None
    return float(np.mean(defined)), float(np.std(defined))


def auc_report(matrix: SimilarityMatrix) -> AucReport:
    """Per-query AUC with mean and standard deviation over the defined ones."""
    similarities = oriented_scores(matrix)
    values = [_auc_from_row(similarities[q], matrix.classes, q) for q in range(len(matrix))]
    missing = [matrix.ids[q] for q, value in enumerate(values) if value is None]
    if missing:
        logger.warning(f"AUC undefined for {len(missing)} single-class queries")
    mean_auc, auc_std = _summary(values)
    return AucReport(
        ids=matrix.ids,
        per_query_auc=values,
        mean_auc=mean_auc,
        auc_std=auc_std,
        missing=missing,
        measure=matrix.measure,
        orientation=matrix.orientation,
    )


def _vote(ranked_classes: Sequence[str]) -> str:
    counts: Dict[str, int] = {}
    rank_sums: Dict[str, int] = {}
    for rank, label in enumerate(ranked_classes, start=1):
        counts[label] = counts.get(label, 0) + 1
        rank_sums[label] = rank_sums.get(label, 0) + rank
    return min(counts, key=lambda label: (-counts[label], rank_sums[label], label))


def knn_predict(train_scores: Sequence[Tuple[float, str]], k: int, orientation: Orientation) -> str:
    """
    Majority class among the k best-ranked training items.

    Ties are broken by the smaller summed rank, then by class name.

    Args:
        train_scores (Sequence[Tuple[float, str]]): (score against the query, class) pairs.
        k (int): Neighbour count, clamped to the training size.
        orientation (Orientation): Ranking direction of the scores.

    Returns:
        str: Predicted class.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not train_scores:
        raise ParameterError("empty training set")
    scores = np.array([score for score, _ in train_scores], dtype=float)
    if orientation == Orientation.SIMILARITY:
        scores = -scores
    order = np.argsort(scores, kind="stable")[:k]
    return _vote([train_scores[j][1] for j in order])


def neighbour_orders(similarities: np.ndarray) -> List[np.ndarray]:
    """For every item, the other items sorted by decreasing similarity (stable on index)."""
    n = len(similarities)
    orders = []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        orders.append(others[np.argsort(-similarities[i, others], kind="stable")])
    return orders


def loo_knn(matrix: SimilarityMatrix, k: int, classes: Optional[Sequence[str]] = None) -> List[str]:
    """Plain leave-one-out KNN predictions, one per item."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    labels = [str(label) for label in (classes if classes is not None else matrix.classes)]
    orders = neighbour_orders(oriented_scores(matrix))
    return [_vote([labels[j] for j in order[:k]]) for order in orders]


def is_degenerate(scores: np.ndarray) -> bool:
    """True when the off-diagonal scores are non-finite or all equal."""
    off_diagonal = scores[~np.eye(len(scores), dtype=bool)]
    if off_diagonal.size == 0 or not np.all(np.isfinite(off_diagonal)):
        return True
    return bool(np.ptp(off_diagonal) == 0.0)


class _InnerTable:
    """
    Leave-one-out KNN predictions of one (parameter point, k) pair, with the
    held-out item removed from the neighbourhoods it appears in.
    """

    def __init__(self, orders: List[np.ndarray], classes: Sequence[str], k: int):
        self.k = k
        self.orders = orders
        self.classes = classes
        n = len(classes)
        self.wrong = np.array([_vote([classes[j] for j in orders[i][:k]]) != classes[i] for i in range(n)])
        self.total_wrong = int(self.wrong.sum())
        # affected[o]: items whose k nearest neighbours include o
        self.affected: List[List[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in orders[i][:k]:
                self.affected[int(j)].append(i)

    def inner_error(self, held_out: int) -> float:
        wrong = self.total_wrong - int(self.wrong[held_out])
        for i in self.affected[held_out]:
            if i == held_out:
                continue
            neighbours = [j for j in self.orders[i][: self.k + 1] if j != held_out][: self.k]
            now_wrong = _vote([self.classes[j] for j in neighbours]) != self.classes[i]
            wrong += int(now_wrong) - int(self.wrong[i])
        return wrong / (len(self.classes) - 1)

    def predict(self, query: int) -> str:
        return _vote([self.classes[j] for j in self.orders[query][: self.k]])


def double_cv_from_matrices(
    candidates: Sequence[Tuple[ParamPoint, SimilarityMatrix]],
    k_values: Sequence[int],
    classes: Optional[Sequence[str]] = None,
    measure: Optional[str] = None,
    seed: int = 0,
) -> EvalReport:
    """
    Leave-one-out double cross-validation over precomputed matrices.

    For every held-out item, inner leave-one-out KNN on the remaining items
    picks the (parameter point, k) with the lowest error (ties: smaller k,
    then smaller sigma, then grid order); the held-out item is predicted with
    it and its AUC is taken from the full matrix of the chosen point.

    Args:
        candidates (Sequence[Tuple[ParamPoint, SimilarityMatrix]]): Grid points in
            grid order with their matrices; all matrices list the same ids.
        k_values (Sequence[int]): Neighbour counts.
        classes (Sequence[str], optional): Class override (label shuffling).
        measure (str, optional): Measure name recorded in the report.
        seed (int): Seed recorded in the report.

    Returns:
        EvalReport: Predictions, per-query AUC, error, confusion and chosen parameters.

    Raises:
        InputError: Fewer than two classes or mismatched matrices.
        ComputationError: Every grid point is degenerate.
    """
    if not candidates:
        raise ParameterError("empty parameter grid")
    if not k_values or any(k < 1 for k in k_values):
        raise ParameterError(f"k values must be positive, got {list(k_values)}")
    ids = list(candidates[0][1].ids)
    labels = [str(label) for label in (classes if classes is not None else candidates[0][1].classes)]
    if len(labels) != len(ids):
        raise InputError(f"{len(labels)} classes for {len(ids)} items")
    if len(set(labels)) < 2:
        raise InputError("double cross-validation needs at least two ligand classes")
    if len(ids) < 3:
        raise InputError("double cross-validation needs at least three items")

    tables: List[Tuple[Tuple, ParamPoint, _InnerTable, np.ndarray]] = []
    skipped: List[Dict] = []
    position = 0
    for point, matrix in candidates:
        if list(matrix.ids) != ids:
            raise InputError(f"matrix at {point.as_record()} lists different items")
        similarities = oriented_scores(matrix)
        if is_degenerate(similarities):
            logger.warning(f"Skipping degenerate grid point {point.as_record()}")
            skipped.append(point.as_record())
            position += len(k_values)
            continue
        orders = neighbour_orders(similarities)
        for k in k_values:
            tables.append(((k, point.sigma if point.sigma is not None else 0.0, position), point,
                           _InnerTable(orders, labels, k), similarities))
            position += 1
    if not tables:
        raise ComputationError("every grid point produced a degenerate score matrix")

    predictions: List[str] = []
    per_query_auc: List[Optional[float]] = []
    chosen: List[Dict] = []
    for query in range(len(ids)):
        best = min(tables, key=lambda entry: (entry[2].inner_error(query),) + entry[0])
        _, point, table, similarities = best
        predictions.append(table.predict(query))
        per_query_auc.append(_auc_from_row(similarities[query], labels, query))
        chosen.append({"id": ids[query], "k": table.k, **point.as_record()})

    confusion: Dict[str, Dict[str, int]] = {}
    for truth, predicted in zip(labels, predictions):
        row = confusion.setdefault(truth, {})
        row[predicted] = row.get(predicted, 0) + 1
    errors = sum(truth != predicted for truth, predicted in zip(labels, predictions))
    mean_auc, auc_std = _summary(per_query_auc)

    logger.info(f"Double CV over {len(tables)} grid entries: error={errors / len(ids):.4f} mean AUC={mean_auc}")
    return EvalReport(
        ids=ids,
        classes=labels,
        predictions=predictions,
        per_query_auc=per_query_auc,
        mean_auc=mean_auc,
        auc_std=auc_std,
        classification_error=errors / len(ids),
        confusion=confusion,
        chosen_params=chosen,
        skipped_params=skipped,
        auc_protocol=AUC_PROTOCOL,
        measure=measure,
        seed=seed,
    )


def shuffled_null(matrix: SimilarityMatrix, n_shuffles: int = 20, seed: int = 0) -> List[float]:
    """
    Mean AUC of the matrix under ``n_shuffles`` random permutations of the classes.
    """
    if n_shuffles < 1:
        raise ParameterError(f"n_shuffles must be >= 1, got {n_shuffles}")
    rng = np.random.default_rng(seed)
    similarities = oriented_scores(matrix)
    means = []
    for _ in range(n_shuffles):
        labels = [str(label) for label in rng.permutation(matrix.classes)]
        values = [_auc_from_row(similarities[q], labels, q) for q in range(len(matrix))]
        mean_auc, _ = _summary(values)
        means.append(mean_auc if mean_auc is not None else math.nan)
    return means
