"""
Geometry module for atom clouds.

This module provides the Gaussian convolution kernel between two labelled atom
clouds under a rigid motion, its analytic gradient with respect to the Euler
angles and the translation, the implicit kernel distance, and the
principal-axis ellipsoid of a cloud.
"""
import math
import warnings
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist
from scipy.spatial.transform import Rotation

from core.exceptions import ParameterError
from schemas.cloud import AtomCloud, EllipsoidSummary, RigidTransform

# semi-axis length = sqrt(3 * covariance eigenvalue)
ELLIPSOID_SCALE = math.sqrt(3.0)


def _check_params(sigma: float, lam: float) -> None:
    if not (sigma > 0) or math.isinf(sigma):
        raise ParameterError(f"sigma must be a positive finite number, got {sigma}")
    if not (lam > 0):
        raise ParameterError(f"lambda must be positive or infinite, got {lam}")


def axis_rotations(phi: float, theta: float, psi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The three elementary factors R_X(phi), R_Y(theta), R_Z(psi).

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: The 3x3 factors.
    """
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cf, sf], [0.0, -sf, cf]])
    ry = np.array([[ct, 0.0, -st], [0.0, 1.0, 0.0], [st, 0.0, ct]])
    rz = np.array([[cp, sp, 0.0], [-sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rx, ry, rz


def euler_rotation(phi: float, theta: float, psi: float) -> np.ndarray:
    rx, ry, rz = axis_rotations(phi, theta, psi)
    return rx @ ry @ rz


def rotation_matrix(transform: RigidTransform) -> np.ndarray:
    """
    Rotation matrix R = R_X(phi) R_Y(theta) R_Z(psi) of a rigid transform.

    Args:
        transform (RigidTransform): The transform.

    Returns:
        np.ndarray: Proper orthonormal 3x3 matrix.
    """
    return euler_rotation(transform.phi, transform.theta, transform.psi)


def rotation_derivatives(phi: float, theta: float, psi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Partial derivatives of R with respect to phi, theta and psi.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: dR/dphi, dR/dtheta, dR/dpsi.
    """
    rx, ry, rz = axis_rotations(phi, theta, psi)
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    drx = np.array([[0.0, 0.0, 0.0], [0.0, -sf, cf], [0.0, -cf, -sf]])
    dry = np.array([[-st, 0.0, -ct], [0.0, 0.0, 0.0], [ct, 0.0, -st]])
    drz = np.array([[-sp, cp, 0.0], [-cp, -sp, 0.0], [0.0, 0.0, 0.0]])
    return drx @ ry @ rz, rx @ dry @ rz, rx @ ry @ drz


def transform_from_matrix(rotation: np.ndarray, translation=(0.0, 0.0, 0.0)) -> RigidTransform:
    """
    Convert a proper rotation matrix and a translation to Euler parameters.

    R_X(a) R_Y(b) R_Z(c) as factored here equals the intrinsic active XYZ
    rotation by (-a, -b, -c).

    Args:
        rotation (np.ndarray): Proper 3x3 rotation matrix.
        translation: Translation vector.

    Returns:
        RigidTransform: Transform whose rotation_matrix reproduces ``rotation``.
    """
    with warnings.catch_warnings():
        # gimbal lock still yields a valid decomposition
        warnings.simplefilter("ignore", UserWarning)
        angles = -Rotation.from_matrix(np.asarray(rotation, dtype=float)).as_euler("XYZ")
    t = np.asarray(translation, dtype=float)
    return RigidTransform(
        phi=float(angles[0]),
        theta=float(angles[1]),
        psi=float(angles[2]),
        translation=(float(t[0]), float(t[1]), float(t[2])),
    )


def apply_transform(positions: np.ndarray, transform: RigidTransform) -> np.ndarray:
    """Positions mapped by y -> R y + y_t."""
    return positions @ rotation_matrix(transform).T + np.asarray(transform.translation)


def transform_cloud(cloud: AtomCloud, transform: RigidTransform, cloud_id: Optional[str] = None) -> AtomCloud:
    """
    Copy of a cloud moved by a rigid transform; labels and metadata are kept.

    Args:
        cloud (AtomCloud): Cloud to move.
        transform (RigidTransform): Motion to apply.
        cloud_id (str, optional): Identifier of the copy.

    Returns:
        AtomCloud: The moved copy.
    """
    moved = apply_transform(cloud.positions, transform)
    atoms = [
        atom.model_copy(update={"position": (float(x), float(y), float(z))})
        for atom, (x, y, z) in zip(cloud.atoms, moved)
    ]
    return AtomCloud(id=cloud_id or cloud.id, atoms=atoms, ligand_class=cloud.ligand_class)


def label_weights(labels1: np.ndarray, labels2: np.ndarray, lam: float) -> Optional[np.ndarray]:
    """
    Pair coefficients exp(-(l_i - l_j)^2 / lambda); None stands for all ones (lambda = inf).
    """
    if math.isinf(lam):
        return None
    diff = labels1[:, None] - labels2[None, :]
    return np.exp(-(diff ** 2) / lam)


def objective(x: np.ndarray, y: np.ndarray, weights: Optional[np.ndarray], params: np.ndarray, sigma: float) -> float:
    """
    Kernel value for parameter vector (phi, theta, psi, tx, ty, tz) on raw arrays.
    """
    moved = y @ euler_rotation(params[0], params[1], params[2]).T + params[3:6]
    gauss = np.exp(-cdist(x, moved, "sqeuclidean") / (2.0 * sigma ** 2))
    if weights is not None:
        gauss = gauss * weights
    return float(gauss.sum())


def objective_and_gradient(
    x: np.ndarray, y: np.ndarray, weights: Optional[np.ndarray], params: np.ndarray, sigma: float
) -> Tuple[float, np.ndarray]:
    """
    Kernel value and its gradient with respect to (phi, theta, psi, tx, ty, tz).

    With d_ij = x_i - (R y_j + y_t) and e_ij the weighted Gaussian terms:
      d/dy_t    = (1/sigma^2) sum e_ij d_ij
      d/dangle  = (1/sigma^2) sum e_ij d_ij . (dR/dangle y_j)
    """
    phi, theta, psi = params[0], params[1], params[2]
    rotation = euler_rotation(phi, theta, psi)
    moved = y @ rotation.T + params[3:6]
    gauss = np.exp(-cdist(x, moved, "sqeuclidean") / (2.0 * sigma ** 2))
    if weights is not None:
        gauss = gauss * weights
    value = float(gauss.sum())

    row_mass = gauss.sum(axis=1)
    col_mass = gauss.sum(axis=0)
    pulled = gauss.T @ x                      # sum_i e_ij x_i, per j
    inv_s2 = 1.0 / sigma ** 2

    grad = np.empty(6)
    grad[3:6] = inv_s2 * (row_mass @ x - col_mass @ moved)
    # per j: sum_i e_ij d_ij = pulled_j - col_mass_j * moved_j
    residual = pulled - col_mass[:, None] * moved
    for index, d_rot in enumerate(rotation_derivatives(phi, theta, psi)):
        grad[index] = inv_s2 * float(np.sum(residual * (y @ d_rot.T)))
    return value, grad


def rigid_kernel_terms(
    x: np.ndarray,
    y: np.ndarray,
    weights: Optional[np.ndarray],
    rotation: np.ndarray,
    translation: np.ndarray,
    sigma: float,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Kernel value for y -> rotation Exp(w) y + translation and its gradients at w = 0.

    w is a rotation vector in the frame of y, so the rotation gradient
    (1/sigma^2) sum_j y_j x (R^T sum_i e_ij d_ij) has no Euler-angle singularity.

    Returns:
        Tuple[float, np.ndarray, np.ndarray]: Value, gradient in the translation,
        gradient in w.
    """
    moved = y @ rotation.T + translation
    gauss = np.exp(-cdist(x, moved, "sqeuclidean") / (2.0 * sigma ** 2))
    if weights is not None:
        gauss = gauss * weights
    inv_s2 = 1.0 / sigma ** 2
    residual = gauss.T @ x - gauss.sum(axis=0)[:, None] * moved
    grad_translation = inv_s2 * residual.sum(axis=0)
    grad_rotation = inv_s2 * np.cross(y, residual @ rotation).sum(axis=0)
    return float(gauss.sum()), grad_translation, grad_rotation


def kernel_ck(
    cloud1: AtomCloud,
    cloud2: AtomCloud,
    transform: Optional[RigidTransform] = None,
    sigma: float = 1.0,
    lam: float = math.inf,
) -> float:
    """
    Convolution kernel between cloud1 and cloud2 moved by ``transform``.

    sum_ij exp(-(l_i - l_j)^2 / lambda) exp(-||x_i - (R y_j + y_t)||^2 / (2 sigma^2))

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        transform (RigidTransform, optional): Motion of cloud2, identity when omitted.
        sigma (float): Gaussian width, > 0.
        lam (float): Label width, > 0, math.inf ignores labels.

    Returns:
        float: Kernel value in (0, N1 * N2].

    Raises:
        ParameterError: Non-positive sigma or lambda.
    """
    _check_params(sigma, lam)
    params = (transform or RigidTransform.identity()).as_vector()
    weights = label_weights(cloud1.labels, cloud2.labels, lam)
    return objective(cloud1.positions, cloud2.positions, weights, params, sigma)


def kernel_gradient(
    cloud1: AtomCloud,
    cloud2: AtomCloud,
    transform: Optional[RigidTransform] = None,
    sigma: float = 1.0,
    lam: float = math.inf,
) -> np.ndarray:
    """
    Gradient of kernel_ck with respect to (phi, theta, psi, tx, ty, tz).

    Args:
        cloud1 (AtomCloud): Fixed cloud.
        cloud2 (AtomCloud): Moving cloud.
        transform (RigidTransform, optional): Motion of cloud2.
        sigma (float): Gaussian width.
        lam (float): Label width.

    Returns:
        np.ndarray: Six gradient components.
    """
    _check_params(sigma, lam)
    params = (transform or RigidTransform.identity()).as_vector()
    weights = label_weights(cloud1.labels, cloud2.labels, lam)
    _, grad = objective_and_gradient(cloud1.positions, cloud2.positions, weights, params, sigma)
    return grad


def ck_distance(cloud1: AtomCloud, cloud2: AtomCloud, sigma: float = 1.0) -> float:
    """
    Implicit kernel distance K(P1,P1) + K(P2,P2) - 2 K(P1,P2), unlabelled, identity transform.

    This is the squared distance between the two clouds in the kernel's feature space.
    """
    self1 = kernel_ck(cloud1, cloud1, None, sigma)
    self2 = kernel_ck(cloud2, cloud2, None, sigma)
    cross = kernel_ck(cloud1, cloud2, None, sigma)
    return max(0.0, self1 + self2 - 2.0 * cross)


def ck_metric(cloud1: AtomCloud, cloud2: AtomCloud, sigma: float = 1.0) -> float:
    """Square root of ck_distance; satisfies the triangle inequality."""
    return math.sqrt(ck_distance(cloud1, cloud2, sigma))


def principal_axes(positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Centroid, covariance eigenvalues (descending, clipped at 0) and a right-handed
    matrix whose columns are the matching eigenvectors.
    """
    centroid = positions.mean(axis=0)
    centered = positions - centroid
    covariance = centered.T @ centered / len(positions)
    values, vectors = eigh(covariance)
    order = np.argsort(values)[::-1]
    values = np.clip(values[order], 0.0, None)
    vectors = vectors[:, order]
    if np.linalg.det(vectors) < 0:
        vectors[:, 2] = -vectors[:, 2]
    return centroid, values, vectors


def ellipsoid_summary(cloud: AtomCloud) -> EllipsoidSummary:
    """
    Ellipsoid built on the principal axes of a cloud.

    Args:
        cloud (AtomCloud): The cloud.

    Returns:
        EllipsoidSummary: Centroid, semi-axis lengths sqrt(3 * eigenvalue), axis directions, volume.
    """
    centroid, values, vectors = principal_axes(cloud.positions)
    lengths = ELLIPSOID_SCALE * np.sqrt(values)
    volume = 4.0 / 3.0 * math.pi * float(np.prod(lengths))
    return EllipsoidSummary(
        centroid=tuple(float(c) for c in centroid),
        axis_lengths=tuple(float(v) for v in lengths),
        axis_directions=[tuple(float(c) for c in vectors[:, k]) for k in range(3)],
        volume=volume,
    )
