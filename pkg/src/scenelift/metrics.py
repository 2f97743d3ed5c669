"""Rigid-scene Procrustes alignment and the scene-level error metrics.

The whole predicted scene is treated as one rigid structure: a single
similarity transform (scale, rotation, translation) is fit over the
concatenated joints of every pose and applied to all of them.  The four
metrics are then:

* PA-MPJPE  - mean joint distance pooled over every joint of every pose.
* SE        - scale error: difference of per-pose root-centered norms.
* TE        - L2 norm of the elementwise mean absolute root translation error.
* RDE       - error of the pelvis-to-pelvis displacement vector.

SE, TE and RDE expect scenes that are already aligned; the one-call
:func:`evaluate_scene_pair` aligns once and computes all four.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Pose3D, Scene3D
from .errors import DegenerateConfiguration, IoFailure, ScenePairMismatch, ZeroNormPose

REPORT_SCHEMA_VERSION = 1

_DEGENERATE_VAR = 1e-18


@dataclass(frozen=True)
class SimilarityTransform:
    """p -> scale * rotation @ p + translation."""

    scale: float
    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(points, dtype=np.float64) @ self.rotation.T) + self.translation


def _check_pair(predicted: Scene3D, gt: Scene3D) -> None:
    if predicted.skeleton.joints != gt.skeleton.joints:
        raise ScenePairMismatch("predicted and ground-truth scenes use different skeletons")
    if len(predicted.poses) != len(gt.poses):
        raise ScenePairMismatch(
            f"pose count mismatch: predicted {len(predicted.poses)} vs ground truth {len(gt.poses)}"
        )


def umeyama(src: np.ndarray, dst: np.ndarray) -> SimilarityTransform:
    """Least-squares similarity transform mapping src points onto dst.

    Classical closed form: SVD of the centered cross-covariance, with the
    determinant sign fix so the rotation is proper.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    n = src.shape[0]
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    xs = src - mu_s
    xd = dst - mu_d
    var_s = float(np.sum(xs * xs)) / n
    if var_s < _DEGENERATE_VAR:
        raise DegenerateConfiguration("all source points coincide; rotation undefined")
    cov = (xd.T @ xs) / n
    u, s, vt = np.linalg.svd(cov)
    d = np.sign(np.linalg.det(u) * np.linalg.det(vt))
    flip = np.ones(3)
    flip[-1] = d
    rotation = u @ np.diag(flip) @ vt
    scale = float(np.sum(s * flip)) / var_s
    translation = mu_d - scale * rotation @ mu_s
    return SimilarityTransform(scale=scale, rotation=rotation, translation=translation)


def align_scene(predicted: Scene3D, gt: Scene3D) -> tuple[SimilarityTransform, Scene3D]:
    """Fit one similarity transform over all joints of all poses jointly
    and return it with the transformed predicted scene."""
    _check_pair(predicted, gt)
    transform = umeyama(predicted.joint_matrix(), gt.joint_matrix())
    poses = tuple(Pose3D(p.skeleton, transform.apply(p.coords)) for p in predicted.poses)
    offsets = transform.apply(predicted.root_offsets)
    aligned = Scene3D(skeleton=predicted.skeleton, poses=poses, root_offsets=offsets)
    return transform, aligned


def pa_mpjpe(predicted: Scene3D, gt: Scene3D, mm_per_unit: float = 1.0) -> float:
    """Procrustes-aligned MPJPE pooled over every joint of every pose."""
    _, aligned = align_scene(predicted, gt)
    dists = np.linalg.norm(aligned.joint_matrix() - gt.joint_matrix(), axis=1)
    return float(np.mean(dists)) * mm_per_unit


def scale_error(predicted: Scene3D, gt: Scene3D, mm_per_unit: float = 1.0) -> tuple[float, float]:
    """Signed scale error of already-aligned scenes.

    Per pose, the size is the Frobenius norm of the root-centered joint
    matrix.  Returns (mean signed difference in mm, mean signed difference
    as a percentage of the ground-truth norm).
    """
    _check_pair(predicted, gt)
    diffs_mm = []
    diffs_pct = []
    for pp, gp in zip(predicted.poses, gt.poses):
        pn = float(np.linalg.norm(pp.centered()))
        gn = float(np.linalg.norm(gp.centered()))
        if gn < 1e-9:
            raise ZeroNormPose("ground-truth pose has near-zero norm")
        diffs_mm.append((pn - gn) * mm_per_unit)
        diffs_pct.append((pn - gn) / gn * 100.0)
    return float(np.mean(diffs_mm)), float(np.mean(diffs_pct))


def translation_error(predicted: Scene3D, gt: Scene3D, mm_per_unit: float = 1.0) -> float:
    """L2 norm of the elementwise mean absolute root translation error
    between already-aligned scenes."""
    _check_pair(predicted, gt)
    err = np.abs(predicted.root_offsets - gt.root_offsets)
    return float(np.linalg.norm(err.mean(axis=0))) * mm_per_unit


def root_displacement_error(
    predicted: Scene3D,
    gt: Scene3D,
    mm_per_unit: float = 1.0,
    magnitude_only: bool = False,
) -> float:
    """Error of the pelvis displacement between already-aligned scenes.

    Default compares displacement vectors (the stricter reading);
    ``magnitude_only=True`` compares their lengths instead.  For scenes
    with more than two poses the displacements of every pose relative to
    pose 1 are compared and averaged.
    """
    _check_pair(predicted, gt)
    errs = []
    for k in range(1, len(predicted.poses)):
        dp = predicted.root_offsets[k] - predicted.root_offsets[0]
        dg = gt.root_offsets[k] - gt.root_offsets[0]
        if magnitude_only:
            errs.append(abs(float(np.linalg.norm(dp)) - float(np.linalg.norm(dg))))
        else:
            errs.append(float(np.linalg.norm(dp - dg)))
    return float(np.mean(errs)) * mm_per_unit


@dataclass(frozen=True)
class FrameMetrics:
    """Metrics for one frame, in millimetres (percentages for SE%)."""

    frame_id: str
    pa_mpjpe: float
    se_mm: float  # mean absolute scale difference
    se_mm_signed: float
    se_percent: float  # signed headline value
    se_percent_abs: float
    te: float
    rde: float

    def as_row(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "pa_mpjpe_mm": self.pa_mpjpe,
            "se_mm": self.se_mm,
            "se_mm_signed": self.se_mm_signed,
            "se_percent": self.se_percent,
            "se_percent_abs": self.se_percent_abs,
            "te_mm": self.te,
            "rde_mm": self.rde,
        }


@dataclass(frozen=True)
class MetricReport:
    """Aggregate metrics over a batch of frames (arithmetic means)."""

    pa_mpjpe: float
    se_mm: float
    se_mm_signed: float
    se_percent: float
    se_percent_abs: float
    te: float
    rde: float
    frames: tuple[FrameMetrics, ...] = field(default_factory=tuple)

    def as_row(self) -> dict:
        return {
            "frame_id": "aggregate",
            "pa_mpjpe_mm": self.pa_mpjpe,
            "se_mm": self.se_mm,
            "se_mm_signed": self.se_mm_signed,
            "se_percent": self.se_percent,
            "se_percent_abs": self.se_percent_abs,
            "te_mm": self.te,
            "rde_mm": self.rde,
        }


def evaluate_scene_pair(
    predicted: Scene3D,
    gt: Scene3D,
    mm_per_unit: float = 1.0,
    frame_id: str = "",
) -> FrameMetrics:
    """Align once, then compute all four metrics for one frame."""
    _, aligned = align_scene(predicted, gt)
    dists = np.linalg.norm(aligned.joint_matrix() - gt.joint_matrix(), axis=1)
    pa = float(np.mean(dists)) * mm_per_unit

    signed_mm = []
    signed_pct = []
    for pp, gp in zip(aligned.poses, gt.poses):
        pn = float(np.linalg.norm(pp.centered()))
        gn = float(np.linalg.norm(gp.centered()))
        if gn < 1e-9:
            raise ZeroNormPose("ground-truth pose has near-zero norm")
        signed_mm.append((pn - gn) * mm_per_unit)
        signed_pct.append((pn - gn) / gn * 100.0)

    te = translation_error(aligned, gt, mm_per_unit)
    rde = root_displacement_error(aligned, gt, mm_per_unit)
    return FrameMetrics(
        frame_id=frame_id,
        pa_mpjpe=pa,
        se_mm=float(np.mean(np.abs(signed_mm))),
        se_mm_signed=float(np.mean(signed_mm)),
        se_percent=float(np.mean(signed_pct)),
        se_percent_abs=float(np.mean(np.abs(signed_pct))),
        te=te,
        rde=rde,
    )


def aggregate_metrics(frames: list[FrameMetrics]) -> MetricReport:
    if not frames:
        raise ScenePairMismatch("no frames to aggregate")
    return MetricReport(
        pa_mpjpe=float(np.mean([f.pa_mpjpe for f in frames])),
        se_mm=float(np.mean([f.se_mm for f in frames])),
        se_mm_signed=float(np.mean([f.se_mm_signed for f in frames])),
        se_percent=float(np.mean([f.se_percent for f in frames])),
        se_percent_abs=float(np.mean([f.se_percent_abs for f in frames])),
        te=float(np.mean([f.te for f in frames])),
        rde=float(np.mean([f.rde for f in frames])),
        frames=tuple(frames),
    )


_CSV_COLUMNS = [
    "frame_id",
    "pa_mpjpe_mm",
    "se_mm",
    "se_mm_signed",
    "se_percent",
    "se_percent_abs",
    "te_mm",
    "rde_mm",
]


def write_report(report: MetricReport, json_path: str | Path, csv_path: str | Path, extra: dict | None = None) -> None:
    """Persist a metric report as JSON plus a per-frame CSV."""
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "aggregate": report.as_row(),
        "frames": [f.as_row() for f in report.frames],
    }
    if extra:
        payload.update(extra)
    try:
        Path(json_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for f in report.frames:
                writer.writerow(f.as_row())
            writer.writerow(report.as_row())
    except OSError as exc:
        raise IoFailure(f"cannot write metric report: {exc}") from exc
