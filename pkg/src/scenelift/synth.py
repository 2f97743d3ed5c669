"""Synthetic two-person scene and camera generator.

Provides exact ground truth for the whole pipeline: world-frame scenes,
per-pose camera-frame 3D, projected 2D poses, true elevation angles and
true depth offsets.  Every generated frame satisfies, by construction:

* each pelvis sits at horizontal range exactly ``c`` from the camera's
  vertical axis, so the true ray elevation angles obey
  ``c * (tan t1 - tan t2) == (pelvis height difference)`` exactly;
* person 1 (the one with the smaller pelvis pixel u) is sized so that its
  2D normalization is scale-free, which makes the full reconstruction of
  a zero-depth-separation frame exactly similar to the world scene;
* both people stand with their lowest foot joint on the ground plane.

Pixel data forms a virtual image: pelvis pixels are placed so that the
horizontal pixel displacement back-projects exactly to the world lateral
separation, vertical pelvis pixels come from a physical pinhole pitched
by the frame's camera elevation (so the naive vertical-displacement
baseline degrades the way a real tilted camera makes it degrade), and the
remaining joints follow each pose's own normalized coordinates at a
shared pixel scale.

Depth separation between the two pelvises is supported (sampling trades
depth against lateral position along the range-``c`` cylinder) but is
fundamentally unrecoverable by the reconstruction, so exactness suites
generate with a zero depth-separation range.

Frames are deterministic functions of (spec seed, frame index).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Pose2D, Pose3D, Scene3D
from .errors import InvalidSpec, IoFailure, SchemaViolation
from .geometry import rotation_about_x
from .lifter import LiftPrediction, save_predictions
from .skeleton import DEFAULT_SKELETON, Skeleton

DATASET_SCHEMA_VERSION = 1

#: Head-to-pelvis vertical drop of person 1, expressed in millimetres.
MM_PER_HEAD_DROP = 500.0


@dataclass(frozen=True)
class CameraConfig:
    """Virtual pinhole camera for one frame.

    ``elevation_deg`` is the elevation of the ray from the camera to the
    midpoint of the two pelvises (positive = camera above, looking down).
    """

    elevation_deg: float
    c: float = 10.0
    pixels_per_unit: float = 3000.0
    principal_point_px: tuple[float, float] = (1920.0, 1080.0)

    def __post_init__(self) -> None:
        if not abs(self.elevation_deg) < 90.0:
            raise InvalidSpec(f"|elevation_deg| must be < 90, got {self.elevation_deg}")
        if not self.c > 1.0:
            raise InvalidSpec(f"c must be > 1, got {self.c}")
        if not self.pixels_per_unit > 0.0:
            raise InvalidSpec("pixels_per_unit must be > 0")

    def to_dict(self) -> dict:
        return {
            "elevation_deg": self.elevation_deg,
            "c": self.c,
            "pixels_per_unit": self.pixels_per_unit,
            "principal_point_px": list(self.principal_point_px),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CameraConfig":
        return cls(
            elevation_deg=float(data["elevation_deg"]),
            c=float(data["c"]),
            pixels_per_unit=float(data["pixels_per_unit"]),
            principal_point_px=tuple(data["principal_point_px"]),
        )


@dataclass(frozen=True)
class SceneSpec:
    """Sampling ranges for the scene generator.

    ``root_height_difference_range`` samples the target pelvis height
    difference directly (person 2's size is solved to realize it).  When
    it is None, person 2's size is instead ``person_scale_range`` relative
    to person 1 and the height difference follows from the bodies.

    ``snap_contact_px``: when the two pelvis pixels end up vertically
    within this distance, person 2 is resized so the pelvis heights are
    exactly equal.  This keeps the downstream contact heuristic consistent
    with the ground truth; None disables snapping.

    ``root_pixel_noise_px``: standard deviation of a seeded, truncated
    (2.5 sigma) Gaussian jitter applied to each pose's vertical position
    in the image, i.e. to its root pixel v with all joint pixels shifted
    rigidly.  Models the vertical pelvis annotation inconsistency typical
    of interaction data; it leaves normalized coordinates and all 3D
    ground truth untouched, degrading only the vertical image
    displacement cue.  Zero keeps the pixel layout exact.
    """

    seed: int = 0
    person_scale_range: tuple[float, float] = (0.85, 1.15)
    horizontal_separation_range: tuple[float, float] = (1.5, 3.0)
    depth_separation_range: tuple[float, float] = (0.0, 0.0)
    root_height_difference_range: Optional[tuple[float, float]] = (-0.6, 0.6)
    pose_templates: tuple[str, ...] = ("standing", "crouching", "reaching", "leaning")
    body_yaw_range: tuple[float, float] = (-math.pi, math.pi)
    snap_contact_px: Optional[float] = 50.0
    root_pixel_noise_px: float = 0.0

    def validate(self) -> None:
        for name in ("person_scale_range", "horizontal_separation_range",
                     "depth_separation_range", "body_yaw_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InvalidSpec(f"{name} must be a finite (lo, hi) with lo <= hi, got {(lo, hi)}")
        if self.root_height_difference_range is not None:
            lo, hi = self.root_height_difference_range
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InvalidSpec("root_height_difference_range must be a finite (lo, hi) with lo <= hi")
        if self.horizontal_separation_range[0] <= 0.0:
            raise InvalidSpec("horizontal separation must be strictly positive")
        if self.person_scale_range[0] <= 0.0:
            raise InvalidSpec("person scale must be strictly positive")
        if not self.pose_templates:
            raise InvalidSpec("pose_templates must not be empty")
        for name in self.pose_templates:
            if name not in _TEMPLATES:
                raise InvalidSpec(f"unknown pose template {name!r}; known: {sorted(_TEMPLATES)}")
        if self.snap_contact_px is not None and self.snap_contact_px < 0.0:
            raise InvalidSpec("snap_contact_px must be >= 0 or None")
        if self.root_pixel_noise_px < 0.0:
            raise InvalidSpec("root_pixel_noise_px must be >= 0")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "person_scale_range": list(self.person_scale_range),
            "horizontal_separation_range": list(self.horizontal_separation_range),
            "depth_separation_range": list(self.depth_separation_range),
            "root_height_difference_range": (
                None if self.root_height_difference_range is None
                else list(self.root_height_difference_range)
            ),
            "pose_templates": list(self.pose_templates),
            "body_yaw_range": list(self.body_yaw_range),
            "snap_contact_px": self.snap_contact_px,
            "root_pixel_noise_px": self.root_pixel_noise_px,
        }

    @classmethod
    def for_ablation(cls, seed: int = 0) -> "SceneSpec":
        """Scene recipe for compensation ablation studies.

        Interaction-style scenes: people close together, pelvis heights
        either in true contact (equal) or clearly separated (the raised
        snap threshold keeps the two regimes apart), with vertical pelvis
        annotation jitter.  These are the conditions under which the
        naive image-displacement baseline visibly degrades while the
        compensated pipeline stays clean.
        """
        return cls(
            seed=seed,
            horizontal_separation_range=(1.0, 2.0),
            root_height_difference_range=(-0.55, 0.55),
            snap_contact_px=105.0,
            root_pixel_noise_px=16.0,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "SceneSpec":
        kwargs = {}
        for key in ("seed",):
            if key in data:
                kwargs[key] = int(data[key])
        for key in ("person_scale_range", "horizontal_separation_range",
                    "depth_separation_range", "body_yaw_range"):
            if key in data:
                kwargs[key] = tuple(float(v) for v in data[key])
        if "root_height_difference_range" in data:
            v = data["root_height_difference_range"]
            kwargs["root_height_difference_range"] = None if v is None else tuple(float(x) for x in v)
        if "pose_templates" in data:
            kwargs["pose_templates"] = tuple(data["pose_templates"])
        if "snap_contact_px" in data:
            v = data["snap_contact_px"]
            kwargs["snap_contact_px"] = None if v is None else float(v)
        if "root_pixel_noise_px" in data:
            kwargs["root_pixel_noise_px"] = float(data["root_pixel_noise_px"])
        return cls(**kwargs)


@dataclass(frozen=True)
class GroundTruthFrame:
    """Everything the oracle and the tests need about one frame."""

    frame_id: str
    world: Scene3D  # world-frame scene, ground plane y = 0
    camera_poses: tuple[Pose3D, ...]  # per-pose camera-frame 3D, root at (0, 0, c)
    poses2d: tuple[Pose2D, ...]
    thetas: np.ndarray  # (P,) true per-pose ray elevation, radians
    depth_offsets: np.ndarray  # (P, J) true per-joint depth offsets
    camera_scales: np.ndarray  # (P,) lifted-size factor of each camera pose
    mm_per_unit: float
    camera_elevation_deg: float
    camera_height: float
    c: float
    pixels_per_unit: float


# ---------------------------------------------------------------------------
# articulated pose library
# ---------------------------------------------------------------------------

_TEMPLATES: dict[str, dict[str, tuple[float, float]]] = {
    "standing": dict(hip=(0, 12), knee=(0, 15), lean=(-6, 6), roll=(-4, 4),
                     arm_pitch=(-15, 25), arm_abduct=(3, 25), elbow=(5, 45)),
    "crouching": dict(hip=(40, 65), knee=(70, 100), lean=(8, 28), roll=(-6, 6),
                      arm_pitch=(0, 45), arm_abduct=(5, 30), elbow=(20, 70)),
    "reaching": dict(hip=(0, 15), knee=(0, 18), lean=(-4, 12), roll=(-5, 5),
                     arm_pitch=(70, 140), arm_abduct=(5, 35), elbow=(0, 30)),
    "leaning": dict(hip=(5, 25), knee=(5, 30), lean=(16, 34), roll=(-8, 8),
                    arm_pitch=(-10, 40), arm_abduct=(3, 25), elbow=(10, 60)),
}

_HIP_HALF = 0.16
_SHOULDER_HALF = 0.21
_UPPER_ARM = 0.28
_FOREARM = 0.25
_HAND = 0.09


def _roty(a: float) -> np.ndarray:
    ca, sa = math.cos(a), math.sin(a)
    return np.array([[ca, 0.0, sa], [0.0, 1.0, 0.0], [-sa, 0.0, ca]])


def _rotz(a: float) -> np.ndarray:
    ca, sa = math.cos(a), math.sin(a)
    return np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])


def _leg(hip: np.ndarray, thigh: float, shank: float, hip_deg: float, knee_deg: float,
         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    a = math.radians(hip_deg)
    g = math.radians(hip_deg - knee_deg)  # shank angle from vertical; negative = foot behind knee
    jx = rng.uniform(-0.03, 0.03)
    knee = hip + np.array([jx, -thigh * math.cos(a), thigh * math.sin(a)])
    ankle = knee + np.array([jx * 0.5, -shank * math.cos(g), shank * math.sin(g)])
    return knee, ankle


def _arm(shoulder: np.ndarray, side: float, pitch_deg: float, abduct_deg: float,
         elbow_deg: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    b = math.radians(abduct_deg)
    hang = np.array([side * math.sin(b), -math.cos(b), 0.0])
    # forward raise = rotation about -x; composed directly since raised arms
    # exceed the pi/2 bound enforced on elevation angles
    p = math.radians(pitch_deg)
    cp, sp = math.cos(p), math.sin(p)
    upper_dir = np.array([[1.0, 0.0, 0.0], [0.0, cp, sp], [0.0, -sp, cp]]) @ hang
    pf = math.radians(pitch_deg + elbow_deg)
    cf, sf = math.cos(pf), math.sin(pf)
    fore_dir = np.array([[1.0, 0.0, 0.0], [0.0, cf, sf], [0.0, -sf, cf]]) @ hang
    elbow = shoulder + _UPPER_ARM * upper_dir
    wrist = elbow + _FOREARM * fore_dir
    hand = wrist + _HAND * fore_dir
    return elbow, wrist, hand


def _sample_body(rng: np.random.Generator, template: str, skeleton: Skeleton) -> np.ndarray:
    """One articulated body in its own frame: pelvis at the origin
    (exact hip midpoint), y up, nominally facing +z, feet below."""
    ranges = _TEMPLATES[template]

    def draw(key: str) -> float:
        lo, hi = ranges[key]
        return float(rng.uniform(lo, hi))

    thigh = 0.60 * (1.0 + 0.05 * rng.uniform(-1, 1))
    shank = 0.58 * (1.0 + 0.05 * rng.uniform(-1, 1))
    torso = 0.92 * (1.0 + 0.05 * rng.uniform(-1, 1))

    joints: dict[str, np.ndarray] = {}
    joints["pelvis"] = np.zeros(3)
    joints["left_hip"] = np.array([-_HIP_HALF, 0.0, 0.0])
    joints["right_hip"] = np.array([_HIP_HALF, 0.0, 0.0])

    for side_name, hip in (("left", joints["left_hip"]), ("right", joints["right_hip"])):
        knee, ankle = _leg(hip, thigh, shank, draw("hip"), draw("knee"), rng)
        joints[f"{side_name}_knee"] = knee
        joints[f"{side_name}_foot"] = ankle

    lean = math.radians(draw("lean"))
    roll = math.radians(draw("roll"))
    up = _rotz(roll) @ np.array([0.0, math.cos(lean), math.sin(lean)])  # lean forward = top toward +z
    lateral = _rotz(roll) @ np.array([1.0, 0.0, 0.0])
    joints["spine"] = 0.38 * torso * up
    neck = 0.78 * torso * up
    joints["neck"] = neck
    joints["head"] = torso * up + np.array([rng.uniform(-0.02, 0.02), 0.0, rng.uniform(-0.02, 0.04)])

    for side_name, side in (("left", -1.0), ("right", 1.0)):
        shoulder = neck + side * _SHOULDER_HALF * lateral - 0.05 * up
        elbow, wrist, hand = _arm(shoulder, side, draw("arm_pitch"), draw("arm_abduct"), draw("elbow"))
        joints[f"{side_name}_shoulder"] = shoulder
        joints[f"{side_name}_elbow"] = elbow
        joints[f"{side_name}_wrist"] = wrist
        joints[f"{side_name}_hand"] = hand

    body = np.stack([joints[name] for name in skeleton.joints])
    drop = -min(body[i, 1] for i in skeleton.foot_indices)
    if drop < 0.35:
        raise InvalidSpec(f"template {template!r} produced a pelvis only {drop:.2f} units above the feet")
    if body[skeleton.head_index, 1] < 0.5:
        raise InvalidSpec(f"template {template!r} produced a head too close to pelvis height")
    return body


# ---------------------------------------------------------------------------
# frame generation
# ---------------------------------------------------------------------------


def _nu_denominator(body: np.ndarray, skeleton: Skeleton, theta: float, c: float) -> float:
    """Denominator of the lifted-size factor: c * r_xy(head) - w_z(head)
    for the body rotated into the pitch-theta virtual camera frame."""
    w = rotation_about_x(-theta) @ body[skeleton.head_index]
    r_xy = math.hypot(w[0], w[1])
    denom = c * r_xy - w[2]
    if denom <= 0.1:
        raise InvalidSpec("head keypoint too close to the pelvis view ray; 2D scale ill-defined")
    return denom


def generate_frame(spec: SceneSpec, camera: CameraConfig, index: int) -> GroundTruthFrame:
    """Deterministically build one two-person ground-truth frame."""
    spec.validate()
    skeleton = DEFAULT_SKELETON
    rng = np.random.default_rng((spec.seed, index))
    c = camera.c
    tan_alpha = math.tan(math.radians(camera.elevation_deg))

    bodies = []
    for _ in range(2):
        template = spec.pose_templates[int(rng.integers(len(spec.pose_templates)))]
        body = _sample_body(rng, template, skeleton)
        yaw = float(rng.uniform(*spec.body_yaw_range))
        bodies.append(body @ _roty(yaw).T)
    body1, body2 = bodies
    drop1 = -min(body1[i, 1] for i in skeleton.foot_indices)
    drop2 = -min(body2[i, 1] for i in skeleton.foot_indices)

    d = float(rng.uniform(*spec.horizontal_separation_range))
    dz = float(rng.uniform(*spec.depth_separation_range))
    rel_scale = float(rng.uniform(*spec.person_scale_range))

    # Pelvis positions on the circle of horizontal range c around the
    # camera axis; the chord (d, dz) must fit inside it.
    chord = math.hypot(d, dz)
    if not 0.0 < chord < 2.0 * c:
        raise InvalidSpec(f"pelvis separation {chord:.3f} does not fit at range c={c}")
    tau = math.sqrt(c * c - 0.25 * chord * chord)
    x1 = -0.5 * d - tau * dz / chord
    z1 = -0.5 * dz + tau * d / chord
    x2, z2 = x1 + d, z1 + dz
    if min(z1, z2) <= 0.1:
        raise InvalidSpec("sampled depth separation places a person behind the camera")

    def solve_droot_from_scales() -> float:
        # person 2's size is rel_scale * person 1's size; the height
        # difference and person 1's size are mutually dependent through
        # theta_1, so iterate the (strongly contracting) fixed point.
        droot = 0.0
        for _ in range(200):
            theta1 = math.atan2(0.5 * droot + tau * tan_alpha, c)
            t1 = c / _nu_denominator(body1, skeleton, theta1, c)
            new = t1 * (rel_scale * drop2 - drop1)
            if abs(new - droot) < 1e-15:
                return new
            droot = new
        return droot

    if spec.root_height_difference_range is not None:
        droot = float(rng.uniform(*spec.root_height_difference_range))
    else:
        droot = solve_droot_from_scales()

    frame = _assemble_frame(spec, camera, index, skeleton, body1, body2, drop1, drop2,
                            d, dz, x1, z1, tau, droot)
    if spec.snap_contact_px is not None and droot != 0.0:
        v1 = frame.poses2d[0].root_pixel[1]
        v2 = frame.poses2d[1].root_pixel[1]
        if abs(v2 - v1) <= spec.snap_contact_px:
            # Close pelvis pixels: regenerate with exactly equal pelvis
            # heights so the contact heuristic stays truth-consistent.
            frame = _assemble_frame(spec, camera, index, skeleton, body1, body2, drop1, drop2,
                                    d, dz, x1, z1, tau, 0.0)
    if spec.root_pixel_noise_px > 0.0:
        sigma = spec.root_pixel_noise_px
        jitter = np.clip(rng.normal(0.0, sigma, 2), -2.5 * sigma, 2.5 * sigma)
        noisy = tuple(
            replace(p, pixel=p.pixel + np.array([0.0, jitter[k]]),
                    root_pixel=p.root_pixel + np.array([0.0, jitter[k]]))
            for k, p in enumerate(frame.poses2d)
        )
        frame = replace(frame, poses2d=noisy)
    return frame


def _assemble_frame(
    spec: SceneSpec,
    camera: CameraConfig,
    index: int,
    skeleton: Skeleton,
    body1: np.ndarray,
    body2: np.ndarray,
    drop1: float,
    drop2: float,
    d: float,
    dz: float,
    x1: float,
    z1: float,
    tau: float,
    droot: float,
) -> GroundTruthFrame:
    c = camera.c
    f = camera.pixels_per_unit
    u0, v0 = camera.principal_point_px
    alpha = math.radians(camera.elevation_deg)
    tan_alpha = math.tan(alpha)
    x2, z2 = x1 + d, z1 + dz

    # True ray elevations; both pelvises sit at horizontal range c, so
    # tan(theta_k) = (camera height - pelvis height) / c exactly.
    theta1 = math.atan2(0.5 * droot + tau * tan_alpha, c)
    theta2 = math.atan2(-0.5 * droot + tau * tan_alpha, c)

    # Person 1's size makes its own 2D normalization scale-free.
    t1 = c / _nu_denominator(body1, skeleton, theta1, c)
    h1 = t1 * drop1
    h2 = h1 + droot
    if h2 <= 0.05:
        raise InvalidSpec(f"root height difference {droot:.3f} pushes person 2 into the ground")
    t2 = h2 / drop2
    camera_height = 0.5 * (h1 + h2) + tau * tan_alpha

    pelvises = (np.array([x1, h1, z1]), np.array([x2, h2, z2]))
    scales = (t1, t2)
    bodies = (body1, body2)
    thetas = (theta1, theta2)

    world_poses = []
    camera_poses = []
    poses2d = []
    depth_offsets = []
    camera_scales = []
    for k in range(2):
        pelvis, t, body, theta = pelvises[k], scales[k], bodies[k], thetas[k]
        world = pelvis + t * body
        centered = world - pelvis
        v_cam = centered @ rotation_about_x(-theta).T
        head = v_cam[skeleton.head_index]
        nu = c / (c * math.hypot(head[0], head[1]) - head[2])
        cam = nu * v_cam
        cam[:, 2] += c
        if float(np.min(cam[:, 2])) < 1.0:
            raise InvalidSpec("a joint's virtual depth fell below the lifting clamp; "
                              "person too large for the configured c")
        norm = cam[:, :2] / cam[:, 2:3]

        u_root = u0 + f * pelvis[0] / c
        y_rel = pelvis[1] - camera_height
        z_bar = -y_rel * math.sin(alpha) + pelvis[2] * math.cos(alpha)
        if z_bar <= 0.5:
            raise InvalidSpec("pelvis projects behind the frame camera")
        v_root = v0 - f * (y_rel * math.cos(alpha) + pelvis[2] * math.sin(alpha)) / z_bar
        pixel = np.column_stack((u_root + norm[:, 0] * f, v_root - norm[:, 1] * f))

        world_poses.append(Pose3D(skeleton, world))
        camera_poses.append(Pose3D(skeleton, cam))
        poses2d.append(Pose2D(skeleton=skeleton, pixel=pixel, norm=norm, norm_scale=f,
                              root_pixel=np.array([u_root, v_root])))
        depth_offsets.append(cam[:, 2] - c)
        camera_scales.append(nu)

    if abs(camera_scales[0] - 1.0) > 1e-9:
        raise InvalidSpec("internal inconsistency: person 1 lifted-size factor is not 1")

    head_drop = world_poses[0].coords[skeleton.head_index, 1] - h1
    if head_drop <= 0.1:
        raise InvalidSpec("person 1 head is not above its pelvis; mm conversion undefined")

    world = Scene3D(skeleton=skeleton, poses=tuple(world_poses),
                    root_offsets=np.stack(pelvises))
    return GroundTruthFrame(
        frame_id=f"{index:04d}",
        world=world,
        camera_poses=tuple(camera_poses),
        poses2d=tuple(poses2d),
        thetas=np.array(thetas),
        depth_offsets=np.stack(depth_offsets),
        camera_scales=np.array(camera_scales),
        mm_per_unit=MM_PER_HEAD_DROP / head_drop,
        camera_elevation_deg=camera.elevation_deg,
        camera_height=camera_height,
        c=c,
        pixels_per_unit=f,
    )


def oracle_prediction(frame: GroundTruthFrame, pose_index: int) -> LiftPrediction:
    """The true depth offsets and elevation angle for one pose."""
    return LiftPrediction(depth_offsets=frame.depth_offsets[pose_index],
                          theta=float(frame.thetas[pose_index]))


def validate_frame(frame: GroundTruthFrame, tol: float = 1e-9) -> None:
    """Re-check the ground-truth invariants of one frame.

    Raises :class:`SchemaViolation` when any of them fails; used by the
    dataset loader and by the test suite.
    """
    sk = frame.world.skeleton
    c = frame.c

    def check(ok: bool, message: str) -> None:
        if not ok:
            raise SchemaViolation(f"frame {frame.frame_id}: {message}")

    for k, (world, cam, pose2d) in enumerate(zip(frame.world.poses, frame.camera_poses, frame.poses2d)):
        proj = cam.coords[:, :2] / cam.coords[:, 2:3]
        check(float(np.max(np.abs(proj - pose2d.norm))) <= tol,
              f"pose {k}: camera 3D does not project onto the stored normalized 2D")
        expect_px = np.column_stack((
            pose2d.norm[:, 0] * pose2d.norm_scale + pose2d.root_pixel[0],
            -pose2d.norm[:, 1] * pose2d.norm_scale + pose2d.root_pixel[1],
        ))
        check(float(np.max(np.abs(expect_px - pose2d.pixel))) <= tol,
              f"pose {k}: pixel coordinates inconsistent with normalized coordinates")
        head_dist = float(np.hypot(*pose2d.norm[sk.head_index]))
        check(abs(head_dist - 1.0 / c) <= tol, f"pose {k}: normalized head-to-root distance is not 1/c")
        check(float(np.max(np.abs(pose2d.norm[sk.root_index]))) <= tol,
              f"pose {k}: normalized root is not at the origin")

        pelvis = frame.world.root_offsets[k]
        check(float(np.max(np.abs(world.coords[sk.root_index] - pelvis))) <= tol,
              f"pose {k}: root offset does not match the pelvis")
        hips = 0.5 * (world.coords[sk.index(sk.left_hip)] + world.coords[sk.index(sk.right_hip)])
        check(float(np.max(np.abs(hips - pelvis))) <= tol, f"pose {k}: pelvis is not the hip midpoint")
        lowest_foot = min(world.coords[i, 1] for i in sk.foot_indices)
        check(abs(lowest_foot) <= tol, f"pose {k}: lowest foot is not on the ground plane")

        rng_horiz = math.hypot(pelvis[0], pelvis[2])
        check(abs(rng_horiz - c) <= tol * c, f"pose {k}: pelvis is not at horizontal range c")
        theta_ray = math.atan2(frame.camera_height - pelvis[1], rng_horiz)
        check(abs(theta_ray - frame.thetas[k]) <= tol,
              f"pose {k}: stored elevation is not the ray elevation")
        check(float(np.max(np.abs(cam.coords[:, 2] - c - frame.depth_offsets[k]))) <= tol,
              f"pose {k}: stored depth offsets inconsistent with camera 3D")

    dh = c * (math.tan(frame.thetas[0]) - math.tan(frame.thetas[1]))
    true_dh = frame.world.root_offsets[1, 1] - frame.world.root_offsets[0, 1]
    check(abs(dh - true_dh) <= tol, "elevation-offset formula does not match the pelvis height difference")


# ---------------------------------------------------------------------------
# dataset files
# ---------------------------------------------------------------------------


def _write_json(path: Path, obj: dict) -> None:
    try:
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def frame_to_dicts(frame: GroundTruthFrame) -> tuple[dict, dict]:
    """Split one frame into its frames/ and gt/ file payloads."""
    frame_doc = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "frame_id": frame.frame_id,
        "camera_elevation_deg": frame.camera_elevation_deg,
        "poses": [dict(pose_id=k, **p.to_dict()) for k, p in enumerate(frame.poses2d)],
    }
    gt_doc = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "frame_id": frame.frame_id,
        "mm_per_unit": frame.mm_per_unit,
        "camera_elevation_deg": frame.camera_elevation_deg,
        "camera_height": frame.camera_height,
        "c": frame.c,
        "pixels_per_unit": frame.pixels_per_unit,
        "world": frame.world.to_dict(),
        "camera_poses": [p.to_dict() for p in frame.camera_poses],
        "thetas": frame.thetas.tolist(),
        "depth_offsets": frame.depth_offsets.tolist(),
        "camera_scales": frame.camera_scales.tolist(),
    }
    return frame_doc, gt_doc


def frame_from_dicts(skeleton: Skeleton, frame_doc: dict, gt_doc: dict) -> GroundTruthFrame:
    try:
        poses2d = tuple(Pose2D.from_dict(skeleton, p) for p in frame_doc["poses"])
        return GroundTruthFrame(
            frame_id=gt_doc["frame_id"],
            world=Scene3D.from_dict(skeleton, gt_doc["world"]),
            camera_poses=tuple(Pose3D.from_dict(skeleton, p) for p in gt_doc["camera_poses"]),
            poses2d=poses2d,
            thetas=np.asarray(gt_doc["thetas"], dtype=np.float64),
            depth_offsets=np.asarray(gt_doc["depth_offsets"], dtype=np.float64),
            camera_scales=np.asarray(gt_doc["camera_scales"], dtype=np.float64),
            mm_per_unit=float(gt_doc["mm_per_unit"]),
            camera_elevation_deg=float(gt_doc["camera_elevation_deg"]),
            camera_height=float(gt_doc["camera_height"]),
            c=float(gt_doc["c"]),
            pixels_per_unit=float(gt_doc["pixels_per_unit"]),
        )
    except KeyError as exc:
        raise SchemaViolation(f"dataset frame is missing field {exc.args[0]!r}") from exc


def generate_dataset(
    spec: SceneSpec,
    cameras: Sequence[CameraConfig],
    count: int,
    out_dir: str | Path,
) -> dict:
    """Write a full dataset: scene_spec.json, frames/, gt/, predictions/oracle.json.

    Frames are assigned to cameras round-robin, so a sweep of E elevations
    over count = k*E frames is uniformly stratified.  Fully reproducible:
    identical (spec, cameras, count) produce byte-identical output.
    """
    if count < 1:
        raise InvalidSpec(f"frame count must be >= 1, got {count}")
    if not cameras:
        raise InvalidSpec("at least one camera configuration is required")
    spec.validate()

    out = Path(out_dir)
    frames_dir = out / "frames"
    gt_dir = out / "gt"
    pred_dir = out / "predictions"
    for sub in (frames_dir, gt_dir, pred_dir):
        sub.mkdir(parents=True, exist_ok=True)

    width = max(4, len(str(count - 1)))
    stratification: dict[str, int] = {}
    oracle_store: dict[tuple[str, int], LiftPrediction] = {}
    for i in range(count):
        camera = cameras[i % len(cameras)]
        frame = generate_frame(spec, camera, i)
        frame = replace(frame, frame_id=f"{i:0{width}d}")
        frame_doc, gt_doc = frame_to_dicts(frame)
        _write_json(frames_dir / f"{frame.frame_id}.json", frame_doc)
        _write_json(gt_dir / f"{frame.frame_id}.json", gt_doc)
        for k in range(len(frame.poses2d)):
            oracle_store[(frame.frame_id, k)] = oracle_prediction(frame, k)
        key = f"{camera.elevation_deg:g}"
        stratification[key] = stratification.get(key, 0) + 1

    save_predictions(pred_dir / "oracle.json", oracle_store)
    meta = {
        "schema_version": DATASET_SCHEMA_VERSION,
        "count": count,
        "spec": spec.to_dict(),
        "cameras": [cam.to_dict() for cam in cameras],
        "stratification": stratification,
        "skeleton": DEFAULT_SKELETON.to_dict(),
    }
    _write_json(out / "scene_spec.json", meta)
    return meta


def load_dataset(root: str | Path, validate: bool = True) -> tuple[dict, list[GroundTruthFrame]]:
    """Read a dataset directory back into memory.

    With ``validate=True`` every frame is re-checked against the
    ground-truth invariants (projection residuals included).
    """
    root = Path(root)
    meta_path = root / "scene_spec.json"
    if not meta_path.exists():
        raise IoFailure(f"{root} is not a dataset directory (missing scene_spec.json)")
    meta = _read_json(meta_path)
    skeleton = Skeleton.from_dict(meta.get("skeleton", DEFAULT_SKELETON.to_dict()))
    frames = []
    for frame_path in sorted((root / "frames").glob("*.json")):
        gt_path = root / "gt" / frame_path.name
        if not gt_path.exists():
            raise IoFailure(f"missing ground-truth file for frame {frame_path.stem}")
        frame = frame_from_dicts(skeleton, _read_json(frame_path), _read_json(gt_path))
        if validate:
            validate_frame(frame)
        frames.append(frame)
    if not frames:
        raise IoFailure(f"dataset {root} contains no frames")
    return meta, frames
