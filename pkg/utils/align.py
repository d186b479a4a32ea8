"""
Alignment module maximizing the convolution kernel over rigid motions.

The second cloud is moved by R(phi, theta, psi) y + y_t. Starting points come
from superposing principal axes (all proper sign combinations, plus swapped
axes when axis lengths are close) and from seeded uniform random rotations.
Each start is refined by gradient ascent with a backtracking step. Steps are
taken about the moving centroid, as rotation vectors scaled by the moving
cloud's radius of gyration, and converted to Euler angles at the end.
"""
import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from core.constants import (
    MAX_STEP,
    MIN_STEP,
    ROTATION_DEDUP_TOLERANCE,
)
from schemas.cloud import AtomCloud, RigidTransform
from schemas.params import AlignConfig
from schemas.results import AlignResult
from utils.geometry import (
    _check_params,
    label_weights,
    objective,
    principal_axes,
    rigid_kernel_terms,
    rotation_matrix,
    transform_from_matrix,
)

logger = logging.getLogger(__name__)

State = Tuple[np.ndarray, np.ndarray]


def _similar_lengths(lengths: np.ndarray, first: int, second: int, ratio: float) -> bool:
    if lengths[first] <= 0.0:
        return True
    return lengths[second] / lengths[first] >= ratio


def _axis_assignments(lengths1: np.ndarray, lengths2: np.ndarray, ratio: float) -> List[Tuple[int, int, int]]:
    swap_01 = _similar_lengths(lengths1, 0, 1, ratio) or _similar_lengths(lengths2, 0, 1, ratio)
    swap_12 = _similar_lengths(lengths1, 1, 2, ratio) or _similar_lengths(lengths2, 1, 2, ratio)
    if swap_01 and swap_12:
        return list(itertools.permutations(range(3)))
    assignments = [(0, 1, 2)]
    if swap_01:
        assignments.append((1, 0, 2))
    if swap_12:
        assignments.append((0, 2, 1))
    return assignments


def _append_unique(rotations: List[np.ndarray], candidate: np.ndarray) -> None:
    for rotation in rotations:
        if np.linalg.norm(rotation - candidate) < ROTATION_DEDUP_TOLERANCE:
            return
    rotations.append(candidate)


def initial_transforms(cloud1: AtomCloud, cloud2: AtomCloud, axis_similarity_ratio: float) -> List[RigidTransform]:
    """
    Starting transforms superposing the principal axes of cloud2 onto those of cloud1.

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        axis_similarity_ratio (float): Adjacent axis lengths with ratio >= this are
            also tried swapped.

    Returns:
        List[RigidTransform]: Deduplicated proper-rotation starts, each mapping the
        centroid of cloud2 onto the centroid of cloud1.
    """
    centroid1, values1, axes1 = principal_axes(cloud1.positions)
    centroid2, values2, axes2 = principal_axes(cloud2.positions)

    if len(cloud2) == 1 or (not values1.any() and not values2.any()):
        return [transform_from_matrix(np.eye(3), centroid1 - centroid2)]

    lengths1, lengths2 = np.sqrt(values1), np.sqrt(values2)
    rotations: List[np.ndarray] = []
    for assignment in _axis_assignments(lengths1, lengths2, axis_similarity_ratio):
        permuted = axes2[:, list(assignment)]
        for signs in itertools.product((1.0, -1.0), repeat=3):
            rotation = axes1 @ np.diag(signs) @ permuted.T
            if np.linalg.det(rotation) < 0:
                continue
            _append_unique(rotations, rotation)

    return [transform_from_matrix(rotation, centroid1 - rotation @ centroid2) for rotation in rotations]


class CenteredKernel:
    """
    The kernel of one cloud pair in centroid-relative, length-scaled coordinates.

    A state is (R, s): the rotation of the moving cloud about its own centroid
    and the offset s of the moved centroid from the fixed centroid. Ascent
    directions are (g*w, s) with w a rotation vector composed onto R and g the
    radius of gyration of the moving cloud, so a unit change of any component
    moves atoms by about one Angstrom.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, weights: Optional[np.ndarray], sigma: float):
        self.raw_x, self.raw_y = x, y
        self.fixed_centroid = x.mean(axis=0)
        self.moving_centroid = y.mean(axis=0)
        self.x = x - self.fixed_centroid
        self.y = y - self.moving_centroid
        self.weights = weights
        self.sigma = sigma
        gyration = math.sqrt(float(np.mean(np.sum(self.y ** 2, axis=1))))
        self.scale = gyration if gyration > 0.0 else 1.0

    def state_of(self, transform: RigidTransform) -> State:
        rotation = rotation_matrix(transform)
        offset = rotation @ self.moving_centroid + np.asarray(transform.translation) - self.fixed_centroid
        return rotation, offset

    def transform_of(self, state: State) -> RigidTransform:
        rotation, offset = state
        return transform_from_matrix(rotation, offset + self.fixed_centroid - rotation @ self.moving_centroid)

    def evaluate(self, state: State) -> Tuple[float, np.ndarray]:
        rotation, offset = state
        value, grad_offset, grad_rotation = rigid_kernel_terms(
            self.x, self.y, self.weights, rotation, offset, self.sigma
        )
        return value, np.concatenate([grad_rotation / self.scale, grad_offset])

    def advance(self, state: State, delta: np.ndarray) -> State:
        rotation, offset = state
        turn = Rotation.from_rotvec(delta[:3] / self.scale).as_matrix()
        return rotation @ turn, offset + delta[3:6]

    def raw_score(self, transform: RigidTransform) -> float:
        return objective(self.raw_x, self.raw_y, self.weights, transform.as_vector(), self.sigma)


def _ascend(
    problem: CenteredKernel,
    state: State,
    cfg: AlignConfig,
    trace: Optional[List[float]] = None,
) -> Tuple[State, float, int, bool]:
    score, grad = problem.evaluate(state)
    if trace is not None:
        trace.append(score)

    step = cfg.initial_step
    iterations = 0
    converged = False
    while iterations < cfg.max_iterations:
        if np.max(np.abs(grad)) < cfg.gradient_tolerance:
            converged = True
            break

        trial_step = step
        accepted = None
        while trial_step >= MIN_STEP:
            candidate = problem.advance(state, trial_step * grad)
            candidate_score, candidate_grad = problem.evaluate(candidate)
            if candidate_score > score:
                accepted = candidate
                break
            trial_step *= 0.5
        if accepted is None:
            # no step along the gradient improves the score
            converged = True
            break

        gain = candidate_score - score
        state, score, grad = accepted, candidate_score, candidate_grad
        iterations += 1
        if trace is not None:
            trace.append(score)
        step = min(2.0 * trial_step, MAX_STEP)
        if gain < cfg.score_tolerance * max(abs(score), np.finfo(float).tiny):
            converged = True
            break

    return state, score, iterations, converged


def gradient_ascent(
    cloud1: AtomCloud,
    cloud2: AtomCloud,
    start: RigidTransform,
    cfg: AlignConfig,
    trace: Optional[List[float]] = None,
) -> AlignResult:
    """
    Refine one starting transform by gradient ascent on the kernel.

    Steps are taken in the coordinates of CenteredKernel; the gradient
    tolerance applies to the gradient in those coordinates.

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        start (RigidTransform): Starting transform.
        cfg (AlignConfig): Optimizer settings.
        trace (List[float], optional): Receives the score after every accepted step.

    Returns:
        AlignResult: Final transform and score; the score never falls below the start's.
    """
    _check_params(cfg.sigma, cfg.lambda_)
    weights = label_weights(cloud1.labels, cloud2.labels, cfg.lambda_)
    problem = CenteredKernel(cloud1.positions, cloud2.positions, weights, cfg.sigma)
    return _run_start(problem, start, 0, cfg, trace)


def _run_start(
    problem: CenteredKernel,
    start: RigidTransform,
    start_index: int,
    cfg: AlignConfig,
    trace: Optional[List[float]] = None,
) -> AlignResult:
    state, _, iterations, converged = _ascend(problem, problem.state_of(start), cfg, trace)
    transform = problem.transform_of(state) if iterations else start
    return AlignResult(
        score=problem.raw_score(transform),
        transform=transform,
        start_index=start_index,
        iterations_used=iterations,
        converged=converged,
    )


def start_transforms(cloud1: AtomCloud, cloud2: AtomCloud, cfg: AlignConfig) -> List[RigidTransform]:
    """
    PCA starts followed by ``extra_random_starts`` seeded uniform random rotations.
    """
    starts = initial_transforms(cloud1, cloud2, cfg.axis_similarity_ratio)
    if cfg.extra_random_starts:
        centroid1 = cloud1.positions.mean(axis=0)
        centroid2 = cloud2.positions.mean(axis=0)
        rng = np.random.default_rng(cfg.seed)
        for _ in range(cfg.extra_random_starts):
            rotation = Rotation.random(None, rng).as_matrix()
            starts.append(transform_from_matrix(rotation, centroid1 - rotation @ centroid2))
    return starts


def sup_ck(cloud1: AtomCloud, cloud2: AtomCloud, cfg: Optional[AlignConfig] = None) -> AlignResult:
    """
    Approximate supremum of the convolution kernel over rigid motions of cloud2.

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        cfg (AlignConfig, optional): Optimizer settings; lambda < inf weights pairs by labels.

    Returns:
        AlignResult: Best result over all starts (ties go to the lowest start index).
    """
    cfg = cfg or AlignConfig()
    _check_params(cfg.sigma, cfg.lambda_)
    weights = label_weights(cloud1.labels, cloud2.labels, cfg.lambda_)
    problem = CenteredKernel(cloud1.positions, cloud2.positions, weights, cfg.sigma)

    best: Optional[AlignResult] = None
    for index, start in enumerate(start_transforms(cloud1, cloud2, cfg)):
        result = _run_start(problem, start, index, cfg)
        if best is None or result.score > best.score:
            best = result
    logger.debug(
        f"sup-CK {cloud1.id} vs {cloud2.id}: score={best.score:.6g} "
        f"start={best.start_index} iterations={best.iterations_used}"
    )
    return best
