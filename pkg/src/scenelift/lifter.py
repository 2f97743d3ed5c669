"""Pluggable lifting predictors.

A predictor consumes one normalized 2D pose at a time and returns the
per-joint depth offsets plus an elevation angle.  The neural lifter
itself is out of scope here; the package ships three stand-ins:

* ``oracle``        - emits the synthetic generator's ground truth.
* ``noisy-oracle``  - oracle plus seeded zero-mean Gaussian noise.
* ``file``          - replays predictions from a JSON file, so externally
                      produced predictions can be evaluated.

Noise model of the noisy oracle (additive, zero-mean Gaussian, seeded;
a stand-in, not a claim about any network's error statistics): the noise
is structured the way monocular lifting errors are.

* Depth offsets: a per-pose common depth shift (the classic monocular
  depth/scale ambiguity, which dominates real lifters' depth error)
  plus smaller per-joint jitter.  The two components split the requested
  variance as ``sigma_d**2 = (0.7 + 0.3) * sigma_d**2``.
* Elevation: one draw per frame, shared by all poses in it - the
  elevation is a property of the camera, so a single-image lifter's
  elevation errors are strongly coupled across the people it sees.

All draws are deterministic functions of (seed, frame index, pose
index), so predictions are reproducible and order-independent, and the
underlying unit draws are reused across noise-level sweeps (common
random numbers).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np

from .core import Pose2D
from .errors import (
    InvalidElevationAngle,
    JointCountMismatch,
    MissingGroundTruth,
    NonFiniteInput,
    PredictionNotFound,
    SchemaViolation,
    IoFailure,
)

if TYPE_CHECKING:  # pragma: no cover
    from .synth import GroundTruthFrame

PREDICTIONS_SCHEMA_VERSION = 1

_THETA_STREAM = 0xE1
_DEPTH_STREAM = 0xD2

#: Share of the depth-noise variance carried by the per-pose common
#: depth shift (the rest is per-joint jitter).
DEPTH_POSE_NOISE_SHARE = 0.7


@dataclass(frozen=True)
class LiftPrediction:
    """Per-joint depth offsets plus one elevation angle for one pose."""

    depth_offsets: np.ndarray  # (J,)
    theta: float  # radians, positive = camera looks down at the pelvis

    def __post_init__(self) -> None:
        d = np.array(self.depth_offsets, dtype=np.float64)
        if d.ndim != 1:
            raise JointCountMismatch(f"depth_offsets must be 1-D, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise NonFiniteInput("depth offsets contain NaN or infinite values")
        d.setflags(write=False)
        object.__setattr__(self, "depth_offsets", d)
        if not math.isfinite(self.theta):
            raise NonFiniteInput(f"theta is not finite: {self.theta}")
        if abs(self.theta) >= math.pi / 2:
            raise InvalidElevationAngle(f"|theta| must be < pi/2, got {self.theta}")


@dataclass(frozen=True)
class PredictionContext:
    """Handle identifying the pose being predicted.

    ``ground_truth`` is required by the oracle kinds; the file kind only
    needs the frame id and pose index.
    """

    frame_id: str
    frame_index: int
    pose_index: int
    ground_truth: Optional["GroundTruthFrame"] = None


@dataclass(frozen=True)
class PredictorSpec:
    """Declarative predictor configuration (CLI and config files)."""

    kind: str  # oracle | noisy-oracle | file
    sigma_d: float = 0.0  # depth-offset noise, scene units
    sigma_theta: float = 0.0  # elevation noise, radians
    path: Optional[str] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("oracle", "noisy-oracle", "file"):
            raise SchemaViolation(f"unknown predictor kind {self.kind!r}")
        if self.sigma_d < 0 or self.sigma_theta < 0:
            raise SchemaViolation("noise levels must be >= 0")
        if self.kind == "file" and not self.path:
            raise SchemaViolation("file predictor requires a path")


class OraclePredictor:
    """Emits the generator's true depth offsets and elevation angle."""

    def predict(self, pose: Pose2D, context: PredictionContext | None) -> LiftPrediction:
        if context is None or context.ground_truth is None:
            raise MissingGroundTruth("oracle predictor needs a ground-truth handle")
        gt = context.ground_truth
        return LiftPrediction(
            depth_offsets=gt.depth_offsets[context.pose_index],
            theta=float(gt.thetas[context.pose_index]),
        )


class NoisyOraclePredictor:
    """Oracle plus seeded Gaussian corruption (see module docstring)."""

    def __init__(self, sigma_d: float, sigma_theta: float, seed: int = 0):
        self.sigma_d = float(sigma_d)
        self.sigma_theta = float(sigma_theta)
        self.seed = int(seed)
        self._oracle = OraclePredictor()

    def predict(self, pose: Pose2D, context: PredictionContext | None) -> LiftPrediction:
        clean = self._oracle.predict(pose, context)
        assert context is not None
        theta_rng = np.random.default_rng((self.seed, context.frame_index, _THETA_STREAM))
        depth_rng = np.random.default_rng((self.seed, context.frame_index, context.pose_index, _DEPTH_STREAM))
        # Unit draws are taken regardless of sigma so that sweeps over noise
        # levels reuse the same underlying randomness (common random numbers).
        theta_eps = float(theta_rng.standard_normal())
        pose_eps = float(depth_rng.standard_normal())
        joint_eps = depth_rng.standard_normal(clean.depth_offsets.shape[0])
        depth_noise = self.sigma_d * (
            math.sqrt(DEPTH_POSE_NOISE_SHARE) * pose_eps
            + math.sqrt(1.0 - DEPTH_POSE_NOISE_SHARE) * joint_eps
        )
        theta = clean.theta + self.sigma_theta * theta_eps
        limit = math.pi / 2 - 1e-9
        theta = max(-limit, min(limit, theta))
        return LiftPrediction(
            depth_offsets=clean.depth_offsets + depth_noise,
            theta=theta,
        )


class FilePredictor:
    """Replays predictions loaded from a prediction file."""

    def __init__(self, store: dict[tuple[str, int], LiftPrediction]):
        self._store = dict(store)

    def __len__(self) -> int:
        return len(self._store)

    def predict(self, pose: Pose2D, context: PredictionContext | None) -> LiftPrediction:
        if context is None:
            raise PredictionNotFound("file predictor needs a prediction context")
        key = (context.frame_id, context.pose_index)
        if key not in self._store:
            raise PredictionNotFound(
                f"no prediction for frame {context.frame_id!r} pose {context.pose_index}"
            )
        return self._store[key]


def make_predictor(spec: PredictorSpec):
    if spec.kind == "oracle":
        return OraclePredictor()
    if spec.kind == "noisy-oracle":
        return NoisyOraclePredictor(spec.sigma_d, spec.sigma_theta, spec.seed)
    return FilePredictor(load_predictions(spec.path))


def load_predictions(path: str | Path) -> dict[tuple[str, int], LiftPrediction]:
    """Parse a prediction file into a store keyed by (frame id, pose id).

    Schema (docs/formats.md): ``{"schema_version": 1, "frames": [{"frame_id",
    "poses": [{"pose_id", "theta_radians", "depth_offsets": [...]}]}]}``.
    Violations are reported with the offending field path.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read predictions file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc

    if not isinstance(data, dict):
        raise SchemaViolation(f"{path}: top level must be an object")
    version = data.get("schema_version")
    if version != PREDICTIONS_SCHEMA_VERSION:
        raise SchemaViolation(f"{path}: schema_version: expected {PREDICTIONS_SCHEMA_VERSION}, got {version!r}")
    frames = data.get("frames")
    if not isinstance(frames, list):
        raise SchemaViolation(f"{path}: frames: expected a list")

    store: dict[tuple[str, int], LiftPrediction] = {}
    for i, frame in enumerate(frames):
        where = f"{path}: frames[{i}]"
        if not isinstance(frame, dict):
            raise SchemaViolation(f"{where}: expected an object")
        frame_id = frame.get("frame_id")
        if not isinstance(frame_id, str):
            raise SchemaViolation(f"{where}.frame_id: missing or not a string")
        poses = frame.get("poses")
        if not isinstance(poses, list):
            raise SchemaViolation(f"{where}.poses: expected a list")
        for j, entry in enumerate(poses):
            pwhere = f"{where}.poses[{j}]"
            if not isinstance(entry, dict):
                raise SchemaViolation(f"{pwhere}: expected an object")
            pose_id = entry.get("pose_id")
            if not isinstance(pose_id, int):
                raise SchemaViolation(f"{pwhere}.pose_id: missing or not an integer")
            if "theta_radians" not in entry:
                raise SchemaViolation(f"{pwhere}.theta_radians: missing field")
            theta = entry["theta_radians"]
            offsets = entry.get("depth_offsets")
            if not isinstance(offsets, list) or not offsets:
                raise SchemaViolation(f"{pwhere}.depth_offsets: missing or empty")
            key = (frame_id, pose_id)
            if key in store:
                raise SchemaViolation(f"{pwhere}: duplicate (frame_id, pose_id) = {key}")
            try:
                store[key] = LiftPrediction(
                    depth_offsets=np.asarray(offsets, dtype=np.float64),
                    theta=float(theta),
                )
            except (TypeError, ValueError, NonFiniteInput, InvalidElevationAngle) as exc:
                raise SchemaViolation(f"{pwhere}: {exc}") from exc
    return store


def save_predictions(
    path: str | Path,
    entries: dict[tuple[str, int], LiftPrediction],
) -> None:
    """Write a prediction store in the documented file format."""
    by_frame: dict[str, list[tuple[int, LiftPrediction]]] = {}
    for (frame_id, pose_id), pred in entries.items():
        by_frame.setdefault(frame_id, []).append((pose_id, pred))
    frames = []
    for frame_id in sorted(by_frame):
        poses = [
            {
                "pose_id": pose_id,
                "theta_radians": pred.theta,
                "depth_offsets": pred.depth_offsets.tolist(),
            }
            for pose_id, pred in sorted(by_frame[frame_id], key=lambda t: t[0])
        ]
        frames.append({"frame_id": frame_id, "poses": poses})
    payload = {"schema_version": PREDICTIONS_SCHEMA_VERSION, "frames": frames}
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write predictions file {path}: {exc}") from exc
