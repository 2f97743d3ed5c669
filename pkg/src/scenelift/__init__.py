"""scenelift: unsupervised multi-person 2D-to-3D scene reconstruction.

Independently lifted poses are combined in a shared frame, compensated
for the camera's elevation angle (rotation plus vertical offset), and
scaled to a common ground plane.  The package also ships the rigid-scene
Procrustes evaluation metrics and a synthetic camera-geometry generator
that provides exact ground truth for all of it.
"""

from .composer import (
    AblationMode,
    MODES,
    ReconstructionResult,
    ground_plane_scale,
    pixel_displacement_to_scene,
    reconstruct,
)
from .core import Constants, DEFAULT_CONSTANTS, Pose2D, Pose3D, Scene3D, denormalize, normalize_pose
from .geometry import (
    compensation_matrix,
    elevation_offset,
    lift_keypoint,
    lift_points,
    lift_pose,
    project_keypoint,
    project_points,
    rotate_pose,
    rotation_about_x,
)
from .lifter import (
    FilePredictor,
    LiftPrediction,
    NoisyOraclePredictor,
    OraclePredictor,
    PredictionContext,
    PredictorSpec,
    load_predictions,
    make_predictor,
    save_predictions,
)
from .metrics import (
    FrameMetrics,
    MetricReport,
    SimilarityTransform,
    aggregate_metrics,
    align_scene,
    evaluate_scene_pair,
    pa_mpjpe,
    root_displacement_error,
    scale_error,
    translation_error,
)
from .skeleton import DEFAULT_SKELETON, Skeleton, load_skeleton, save_skeleton
from .synth import (
    CameraConfig,
    GroundTruthFrame,
    SceneSpec,
    generate_dataset,
    generate_frame,
    load_dataset,
    oracle_prediction,
    validate_frame,
)

__version__ = "0.1.0"

__all__ = [
    "AblationMode",
    "CameraConfig",
    "Constants",
    "DEFAULT_CONSTANTS",
    "DEFAULT_SKELETON",
    "FilePredictor",
    "FrameMetrics",
    "GroundTruthFrame",
    "LiftPrediction",
    "MODES",
    "MetricReport",
    "NoisyOraclePredictor",
    "OraclePredictor",
    "Pose2D",
    "Pose3D",
    "PredictionContext",
    "PredictorSpec",
    "ReconstructionResult",
    "Scene3D",
    "SceneSpec",
    "SimilarityTransform",
    "Skeleton",
    "aggregate_metrics",
    "align_scene",
    "compensation_matrix",
    "denormalize",
    "elevation_offset",
    "evaluate_scene_pair",
    "generate_dataset",
    "generate_frame",
    "ground_plane_scale",
    "lift_keypoint",
    "lift_points",
    "lift_pose",
    "load_dataset",
    "load_predictions",
    "load_skeleton",
    "make_predictor",
    "normalize_pose",
    "oracle_prediction",
    "pa_mpjpe",
    "pixel_displacement_to_scene",
    "project_keypoint",
    "project_points",
    "reconstruct",
    "root_displacement_error",
    "rotate_pose",
    "rotation_about_x",
    "save_predictions",
    "save_skeleton",
    "scale_error",
    "translation_error",
    "validate_frame",
]
