"""Pose and scene value types plus the 2D normalization protocol.

Conventions used throughout the package:

* Pixel space: ``u`` grows rightward, ``v`` grows downward (image rows).
* Normalized space: root at the origin, ``x`` rightward, ``y`` upward
  (``y = -(v - v_root) / norm_scale``).  Each pose is normalized
  individually so its own head-to-root distance is exactly ``1 / c``.
* 3D scene space: right-handed with ``y`` vertical; the ground plane is
  ``y = 0``; depth grows away from the camera.

All types are immutable values: coordinate arrays are copied on
construction and marked read-only, so instances are safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegeneratePose, JointCountMismatch, MissingJoint, NonFiniteInput
from .skeleton import Skeleton

#: Minimum head-to-root pixel distance for a defined normalization scale.
_MIN_HEAD_DIST_PX = 1e-6


@dataclass(frozen=True)
class Constants:
    """Fixed pipeline constants.

    ``c`` is the conventional camera-to-root distance (the root of every
    lifted pose sits nominally at depth ``c``).  ``contact_threshold_px``
    is the vertical pelvis pixel distance at or under which the two poses'
    elevation angles are assumed equal.
    """

    c: float = 10.0
    contact_threshold_px: float = 50.0

    def __post_init__(self) -> None:
        if not self.c > 1.0:
            raise NonFiniteInput(f"c must be > 1, got {self.c}")
        if self.contact_threshold_px < 0.0:
            raise NonFiniteInput(f"contact_threshold_px must be >= 0, got {self.contact_threshold_px}")


DEFAULT_CONSTANTS = Constants()


def _freeze(arr: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    if out.shape != shape:
        raise JointCountMismatch(f"expected array of shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteInput("coordinate array contains NaN or infinite values")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Pose2D:
    """One person's 2D keypoints in pixel space and normalized space."""

    skeleton: Skeleton
    pixel: np.ndarray  # (J, 2) pixel coordinates, v down
    norm: np.ndarray  # (J, 2) normalized coordinates, y up, root at origin
    norm_scale: float  # pixels per normalized unit
    root_pixel: np.ndarray  # (2,) pelvis pixel position

    def __post_init__(self) -> None:
        j = len(self.skeleton)
        object.__setattr__(self, "pixel", _freeze(self.pixel, (j, 2)))
        object.__setattr__(self, "norm", _freeze(self.norm, (j, 2)))
        object.__setattr__(self, "root_pixel", _freeze(self.root_pixel, (2,)))
        if not (math.isfinite(self.norm_scale) and self.norm_scale > 0.0):
            raise DegeneratePose(f"norm_scale must be positive and finite, got {self.norm_scale}")

    def to_dict(self) -> dict:
        return {
            "pixel": self.pixel.tolist(),
            "norm": self.norm.tolist(),
            "norm_scale": self.norm_scale,
            "root_pixel": self.root_pixel.tolist(),
        }

    @classmethod
    def from_dict(cls, skeleton: Skeleton, data: dict) -> "Pose2D":
        return cls(
            skeleton=skeleton,
            pixel=np.asarray(data["pixel"], dtype=np.float64),
            norm=np.asarray(data["norm"], dtype=np.float64),
            norm_scale=float(data["norm_scale"]),
            root_pixel=np.asarray(data["root_pixel"], dtype=np.float64),
        )


@dataclass(frozen=True)
class Pose3D:
    """Per-joint 3D coordinates in scene units (1 unit = one normalized
    2D unit back-projected at depth c)."""

    skeleton: Skeleton
    coords: np.ndarray  # (J, 3)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _freeze(self.coords, (len(self.skeleton), 3)))

    @property
    def root(self) -> np.ndarray:
        return self.coords[self.skeleton.root_index]

    def centered(self) -> np.ndarray:
        """Joint coordinates relative to the root."""
        return self.coords - self.root

    def to_dict(self) -> dict:
        return {"coords": self.coords.tolist()}

    @classmethod
    def from_dict(cls, skeleton: Skeleton, data: dict) -> "Pose3D":
        return cls(skeleton=skeleton, coords=np.asarray(data["coords"], dtype=np.float64))


@dataclass(frozen=True)
class Scene3D:
    """Two or more poses in one shared right-handed frame (y vertical)."""

    skeleton: Skeleton
    poses: tuple[Pose3D, ...]
    root_offsets: np.ndarray  # (P, 3) root position of each pose

    def __post_init__(self) -> None:
        if len(self.poses) < 2:
            raise JointCountMismatch(f"a scene needs >= 2 poses, got {len(self.poses)}")
        object.__setattr__(self, "poses", tuple(self.poses))
        object.__setattr__(self, "root_offsets", _freeze(self.root_offsets, (len(self.poses), 3)))

    def joint_matrix(self) -> np.ndarray:
        """All joints of all poses stacked into a (P*J, 3) matrix."""
        return np.concatenate([p.coords for p in self.poses], axis=0)

    def to_dict(self) -> dict:
        return {
            "poses": [p.coords.tolist() for p in self.poses],
            "root_offsets": self.root_offsets.tolist(),
        }

    @classmethod
    def from_dict(cls, skeleton: Skeleton, data: dict) -> "Scene3D":
        poses = tuple(Pose3D(skeleton, np.asarray(c, dtype=np.float64)) for c in data["poses"])
        return cls(skeleton=skeleton, poses=poses, root_offsets=np.asarray(data["root_offsets"], dtype=np.float64))


def _pixel_array(raw: Mapping[str, Sequence[float]] | np.ndarray, skeleton: Skeleton) -> np.ndarray:
    """Coerce raw per-joint pixels to a (J, 2) array in skeleton order.

    Dict input may omit the root joint, in which case it is synthesized as
    the midpoint of the two hips (the root is defined as that midpoint).
    """
    if isinstance(raw, Mapping):
        px = np.full((len(skeleton), 2), np.nan)
        for name, value in raw.items():
            if name in skeleton:
                px[skeleton.index(name)] = np.asarray(value, dtype=np.float64)
        ri = skeleton.root_index
        if np.any(np.isnan(px[ri])):
            lh, rh = px[skeleton.index(skeleton.left_hip)], px[skeleton.index(skeleton.right_hip)]
            if np.any(np.isnan(lh)) or np.any(np.isnan(rh)):
                raise MissingJoint(f"root joint {skeleton.root!r} absent and hips incomplete")
            px[ri] = 0.5 * (lh + rh)
        missing = [skeleton.joints[i] for i in np.flatnonzero(np.any(np.isnan(px), axis=1))]
        if missing:
            raise MissingJoint(f"missing joints: {', '.join(missing)}")
        return px
    px = np.asarray(raw, dtype=np.float64)
    if px.shape != (len(skeleton), 2):
        raise JointCountMismatch(f"expected ({len(skeleton)}, 2) pixel array, got {px.shape}")
    if np.any(np.isnan(px)):
        missing = [skeleton.joints[i] for i in np.flatnonzero(np.any(np.isnan(px), axis=1))]
        raise MissingJoint(f"missing joints: {', '.join(missing)}")
    if not np.all(np.isfinite(px)):
        raise NonFiniteInput("pixel coordinates contain infinite values")
    return px


def normalize_pose(
    raw: Mapping[str, Sequence[float]] | np.ndarray,
    skeleton: Skeleton,
    constants: Constants = DEFAULT_CONSTANTS,
) -> Pose2D:
    """Root-center and rescale a raw pixel pose.

    The root moves to the normalized origin and the pose is scaled so the
    head-to-root distance is exactly ``1 / c``; the vertical axis is
    flipped so normalized y grows upward.  Pixel coordinates are kept
    unchanged on the returned pose.
    """
    px = _pixel_array(raw, skeleton)
    root_px = px[skeleton.root_index].copy()
    delta = px - root_px
    head_dist = float(np.hypot(*delta[skeleton.head_index]))
    if head_dist < _MIN_HEAD_DIST_PX:
        raise DegeneratePose(
            f"head-to-root pixel distance {head_dist:.3g} px is below {_MIN_HEAD_DIST_PX} px; scale undefined"
        )
    scale = head_dist * constants.c  # head maps to distance 1/c
    norm = np.column_stack((delta[:, 0], -delta[:, 1])) / scale
    return Pose2D(skeleton=skeleton, pixel=px, norm=norm, norm_scale=scale, root_pixel=root_px)


def denormalize(pose: Pose2D) -> np.ndarray:
    """Map normalized coordinates back to pixels (exact inverse of
    :func:`normalize_pose` on the coordinate data)."""
    u = pose.norm[:, 0] * pose.norm_scale + pose.root_pixel[0]
    v = -pose.norm[:, 1] * pose.norm_scale + pose.root_pixel[1]
    return np.column_stack((u, v))
