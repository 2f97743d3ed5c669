"""End-to-end scene reconstruction from independently lifted poses.

Pipeline order (two or more poses; pairwise semantics are defined against
pose 1, the pose with the smaller pelvis pixel u):

1. lift each pose independently (perspective lift with depth clamp);
2. place all roots at the shared origin;
3. optionally rotate each pose about its root by its elevation angle;
4. when the contact heuristic is on and two pelvises are vertically
   within the pixel threshold, treat their elevation angles as equal
   (replaced by their mean) for the displacement step;
5. vertical displacement between roots, either from the elevation-offset
   formula or, in the naive baseline, from the image's vertical pixel
   displacement;
6. horizontal displacement from the image's horizontal pixel displacement;
7. scale each pose about its root so its lowest foot lands on y = 0.

The result carries diagnostics that exactly describe the applied
transform: re-applying them to the freshly lifted poses reproduces the
scene.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Constants, DEFAULT_CONSTANTS, Pose2D, Pose3D, Scene3D
from .errors import DegenerateScaling, FewerThanTwoPoses, JointCountMismatch
from .geometry import compensation_matrix, elevation_offset, lift_pose
from .lifter import LiftPrediction

_MIN_FOOT_DROP = 1e-9


@dataclass(frozen=True)
class AblationMode:
    """Which compensation steps run; the four ablation rows are
    (False,False,False), (False,False,True), (False,True,True),
    (True,True,True)."""

    elevation_compensation: bool
    rotation_compensation: bool
    contact_heuristic: bool

    def to_dict(self) -> dict:
        return {
            "elevation_compensation": self.elevation_compensation,
            "rotation_compensation": self.rotation_compensation,
            "contact_heuristic": self.contact_heuristic,
        }


#: Named modes matching the ablation table rows, worst to best.
MODES: dict[str, AblationMode] = {
    "naive": AblationMode(False, False, False),
    "heuristic": AblationMode(False, False, True),
    "rotation": AblationMode(False, True, True),
    "full": AblationMode(True, True, True),
}


@dataclass(frozen=True)
class ReconstructionResult:
    """Reconstructed scene plus the exact per-pose transform diagnostics.

    All per-pose arrays follow the input pose order.  For each pose k the
    scene coordinates equal
    ``root_offset[k] + scale[k] * (R_x(rotation_angle[k]) @ centered lifted pose k)``.
    """

    scene: Scene3D
    rotation_angles: np.ndarray  # (P,) radians actually applied (0 when off)
    vertical_offsets: np.ndarray  # (P,) root y displacement relative to pose 1
    horizontal_offsets: np.ndarray  # (P,) root x displacement relative to pose 1
    scale_factors: np.ndarray  # (P,) ground-plane scale factors
    heuristic_fired: tuple[bool, ...]  # per pose, pairwise against pose 1
    mode: AblationMode

    def to_dict(self) -> dict:
        return {
            "scene": self.scene.to_dict(),
            "diagnostics": {
                "rotation_angles": self.rotation_angles.tolist(),
                "vertical_offsets": self.vertical_offsets.tolist(),
                "horizontal_offsets": self.horizontal_offsets.tolist(),
                "scale_factors": self.scale_factors.tolist(),
                "heuristic_fired": list(self.heuristic_fired),
            },
            "mode": self.mode.to_dict(),
        }


def pixel_displacement_to_scene(delta_px: float, pose_a: Pose2D, pose_b: Pose2D, c: float) -> float:
    """Back-project a pixel offset between two poses to scene units at
    root depth c: delta / mean(norm scales) * c."""
    mean_scale = 0.5 * (pose_a.norm_scale + pose_b.norm_scale)
    return float(delta_px) / mean_scale * float(c)


def ground_plane_scale(pose: Pose3D, root_height: float) -> tuple[Pose3D, float]:
    """Scale a root-centered pose so that, with its root at ``root_height``,
    the lowest foot joint lands exactly on y = 0.

    Returns the scaled (still root-centered) pose and the scale factor
    ``s = root_height / (root-to-lowest-foot vertical drop)``.
    """
    feet = pose.skeleton.foot_indices
    drop = -float(np.min(pose.coords[list(feet), 1]))
    if drop <= _MIN_FOOT_DROP:
        raise DegenerateScaling(f"root-to-lowest-foot drop {drop:.3g} is not positive")
    if root_height <= 0.0:
        raise DegenerateScaling(f"root height {root_height:.3g} is not above the ground plane")
    s = root_height / drop
    return Pose3D(pose.skeleton, pose.coords * s), s


def reconstruct(
    poses: list[Pose2D] | tuple[Pose2D, ...],
    predictions: list[LiftPrediction] | tuple[LiftPrediction, ...],
    mode: AblationMode,
    constants: Constants = DEFAULT_CONSTANTS,
) -> ReconstructionResult:
    """Run the full reconstruction for one frame.

    The returned scene keeps the input pose order; internally the pose
    with the smaller pelvis pixel u (ties: smaller v) anchors the scene.
    """
    n = len(poses)
    if n < 2:
        raise FewerThanTwoPoses(f"scene reconstruction needs >= 2 poses, got {n}")
    if len(predictions) != n:
        raise JointCountMismatch(f"{n} poses but {len(predictions)} predictions")
    c = constants.c

    order = sorted(range(n), key=lambda i: (poses[i].root_pixel[0], poses[i].root_pixel[1]))
    anchor = order[0]

    lifted = [lift_pose(poses[i], predictions[i], c) for i in range(n)]
    centered = [p.centered() for p in lifted]

    rotation_angles = np.zeros(n)
    rotated = []
    for i in range(n):
        if mode.rotation_compensation:
            theta = predictions[i].theta
            rotation_angles[i] = theta
            rotated.append(centered[i] @ compensation_matrix(theta).T)
        else:
            rotated.append(centered[i])

    skeleton = poses[0].skeleton
    feet = list(skeleton.foot_indices)

    fired = [False] * n
    vertical = np.zeros(n)
    horizontal = np.zeros(n)
    u_a, v_a = poses[anchor].root_pixel
    for i in range(n):
        if i == anchor:
            continue
        u_i, v_i = poses[i].root_pixel
        fired[i] = bool(mode.contact_heuristic and abs(v_i - v_a) <= constants.contact_threshold_px)
        theta_a, theta_i = predictions[anchor].theta, predictions[i].theta
        if fired[i]:
            theta_a = theta_i = 0.5 * (predictions[anchor].theta + predictions[i].theta)
        if mode.elevation_compensation:
            # pose i plays the second role: its root sits above the anchor's
            # by c * (tan theta_anchor - tan theta_i)
            vertical[i] = elevation_offset(theta_a, theta_i, c)
        elif fired[i]:
            vertical[i] = 0.0
        else:
            # naive baseline: the image's vertical pixel displacement,
            # back-projected at depth c (pixel v grows downward)
            vertical[i] = -pixel_displacement_to_scene(v_i - v_a, poses[anchor], poses[i], c)
        horizontal[i] = pixel_displacement_to_scene(u_i - u_a, poses[anchor], poses[i], c)

    # The anchor's own lifted geometry sets the scene's height scale.
    anchor_drop = -float(np.min(rotated[anchor][feet, 1]))
    if anchor_drop <= _MIN_FOOT_DROP:
        raise DegenerateScaling("anchor pose has no foot below its root")
    root_heights = np.empty(n)
    scale_factors = np.empty(n)
    scaled = [None] * n
    for i in range(n):
        root_heights[i] = anchor_drop + vertical[i]
        pose_i = Pose3D(skeleton, rotated[i])
        scaled_pose, s = ground_plane_scale(pose_i, float(root_heights[i]))
        scaled[i] = scaled_pose.coords
        scale_factors[i] = s

    root_offsets = np.column_stack((horizontal, root_heights, np.zeros(n)))
    final = tuple(Pose3D(skeleton, scaled[i] + root_offsets[i]) for i in range(n))
    scene = Scene3D(skeleton=skeleton, poses=final, root_offsets=root_offsets)
    return ReconstructionResult(
        scene=scene,
        rotation_angles=rotation_angles,
        vertical_offsets=vertical,
        horizontal_offsets=horizontal,
        scale_factors=scale_factors,
        heuristic_fired=tuple(fired),
        mode=mode,
    )
