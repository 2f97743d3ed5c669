"""Closed-form camera geometry: perspective lifting, elevation offset,
and rotation compensation about the x axis.

Sign conventions: a positive elevation angle means the camera looks down
at the subject's pelvis.  The compensation matrix ``rotation_about_x(theta)``
maps a camera-frame pose (tilted down by ``theta``) back to a level,
world-oriented pose.  The synthetic generator in :mod:`scenelift.synth`
is built with the same conventions, so the sign is validated end to end.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Pose3D
from .errors import (
    DepthTooSmall,
    InvalidElevationAngle,
    JointCountMismatch,
    NonFiniteInput,
)

_HALF_PI = math.pi / 2.0


def _check_angle(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise NonFiniteInput(f"elevation angle is not finite: {theta}")
    if abs(theta) >= _HALF_PI:
        raise InvalidElevationAngle(f"|theta| must be < pi/2, got {theta}")
    return theta


def lift_keypoint(x: float, y: float, d_hat: float, c: float) -> tuple[float, float, float]:
    """Lift one normalized 2D keypoint to 3D.

    Depth is the clamped ``z = max(1, d_hat + c)``; the 3D point is
    ``(x*z, y*z, z)``.
    """
    for v in (x, y, d_hat, c):
        if not math.isfinite(v):
            raise NonFiniteInput(f"non-finite lift input: ({x}, {y}, {d_hat}, {c})")
    z = max(1.0, float(d_hat) + float(c))
    return (float(x) * z, float(y) * z, z)


def lift_points(xy: np.ndarray, d_hat: np.ndarray, c: float) -> np.ndarray:
    """Vectorized lift: (N, 2) normalized points + (N,) depth offsets -> (N, 3)."""
    xy = np.asarray(xy, dtype=np.float64)
    d_hat = np.asarray(d_hat, dtype=np.float64)
    if not (np.all(np.isfinite(xy)) and np.all(np.isfinite(d_hat)) and math.isfinite(c)):
        raise NonFiniteInput("non-finite lift input")
    z = np.maximum(1.0, d_hat + c)
    return np.column_stack((xy[:, 0] * z, xy[:, 1] * z, z))


def lift_pose(pose, prediction, c: float) -> Pose3D:
    """Lift a whole normalized pose using a predictor's depth offsets.

    The root (normalized origin) maps to ``(0, 0, max(1, d_root + c))``.
    """
    d = np.asarray(prediction.depth_offsets, dtype=np.float64)
    if d.shape != (len(pose.skeleton),):
        raise JointCountMismatch(
            f"prediction has {d.shape[0] if d.ndim == 1 else d.shape} depth offsets "
            f"for a {len(pose.skeleton)}-joint pose"
        )
    return Pose3D(pose.skeleton, lift_points(pose.norm, d, c))


def project_keypoint(x: float, y: float, z: float) -> tuple[float, float]:
    """Perspective projection of a camera-frame point: ``(x/z, y/z)``.

    Exact inverse of :func:`lift_keypoint` whenever the depth clamp did
    not engage; depths below the clamp floor are rejected.
    """
    if z < 1.0:
        raise DepthTooSmall(f"depth {z} is below the clamp floor 1")
    return (float(x) / float(z), float(y) / float(z))


def project_points(points: np.ndarray) -> np.ndarray:
    """Vectorized projection: (N, 3) camera-frame points -> (N, 2)."""
    pts = np.asarray(points, dtype=np.float64)
    if np.any(pts[:, 2] < 1.0):
        bad = float(np.min(pts[:, 2]))
        raise DepthTooSmall(f"depth {bad} is below the clamp floor 1")
    return pts[:, :2] / pts[:, 2:3]


def elevation_offset(theta1: float, theta2: float, c: float) -> float:
    """Vertical offset between two poses' roots: ``c * (tan t1 - tan t2)``.

    Positive when the camera looks down more steeply at pose 1, i.e. pose
    2's root sits higher than pose 1's by the returned amount.
    """
    t1 = _check_angle(theta1)
    t2 = _check_angle(theta2)
    return float(c) * (math.tan(t1) - math.tan(t2))


def rotation_about_x(theta: float) -> np.ndarray:
    """Rotation matrix about the x axis by ``theta`` (right-handed)."""
    t = _check_angle(theta)
    ct, st = math.cos(t), math.sin(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, ct, -st], [0.0, st, ct]])


def compensation_matrix(theta: float, opposite_sign: bool = False) -> np.ndarray:
    """Elevation compensation rotation for a pose with predicted ``theta``.

    ``opposite_sign=True`` selects R(-theta) instead; it exists only as a
    documented negative control for the sign-convention tests and fails
    the synthetic tilt oracle.
    """
    return rotation_about_x(-theta if opposite_sign else theta)


def rotate_pose(pose: Pose3D, rotation: np.ndarray, center: np.ndarray) -> Pose3D:
    """Rotate a pose about ``center``: each joint p -> R @ (p - center) + center."""
    r = np.asarray(rotation, dtype=np.float64)
    ctr = np.asarray(center, dtype=np.float64)
    coords = (pose.coords - ctr) @ r.T + ctr
    return Pose3D(pose.skeleton, coords)


def is_rotation_matrix(r: np.ndarray, tol: float = 1e-9) -> bool:
    """True when r is orthogonal with determinant +1 within ``tol``."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        return False
    ortho = float(np.max(np.abs(r.T @ r - np.eye(3))))
    return ortho <= tol and abs(float(np.linalg.det(r)) - 1.0) <= tol
