"""Exception types raised across the package."""


class SceneLiftError(Exception):
    """Base class for all scenelift errors."""


class MissingJoint(SceneLiftError):
    """A required joint is absent from the input."""


class DegeneratePose(SceneLiftError):
    """Pose geometry does not admit a defined normalization scale."""


class NonFiniteInput(SceneLiftError):
    """A numeric input is NaN or infinite."""


class InvalidElevationAngle(SceneLiftError):
    """Elevation angle outside (-pi/2, pi/2); tangent undefined."""


class JointCountMismatch(SceneLiftError):
    """Per-joint data does not match the skeleton's joint count."""


class DepthTooSmall(SceneLiftError):
    """Projection requested for a point with depth below the clamp floor."""


class MissingGroundTruth(SceneLiftError):
    """Oracle predictor invoked without a ground-truth handle."""


class PredictionNotFound(SceneLiftError):
    """File-backed predictor has no entry for the requested frame/pose."""


class SchemaViolation(SceneLiftError):
    """A data file does not conform to its documented schema."""


class FewerThanTwoPoses(SceneLiftError):
    """Scene reconstruction needs at least two poses."""


class DegenerateScaling(SceneLiftError):
    """Ground-plane scale factor undefined or non-positive."""


class DegenerateConfiguration(SceneLiftError):
    """Point configuration leaves the Procrustes rotation undefined."""


class ZeroNormPose(SceneLiftError):
    """A ground-truth pose has (near-)zero norm; scale error undefined."""


class InvalidSpec(SceneLiftError):
    """Scene/camera specification is invalid or unsatisfiable."""


class IoFailure(SceneLiftError):
    """A dataset file could not be read or written."""


class ScenePairMismatch(SceneLiftError):
    """Predicted and ground-truth scene sets do not line up."""
