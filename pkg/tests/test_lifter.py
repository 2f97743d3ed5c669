import json

import numpy as np
import pytest

from scenelift import (
    CameraConfig,
    Constants,
    MODES,
    SceneSpec,
    evaluate_scene_pair,
    generate_frame,
    lift_pose,
    load_predictions,
    make_predictor,
    oracle_prediction,
    reconstruct,
    save_predictions,
)
from scenelift.errors import (
    MissingGroundTruth,
    PredictionNotFound,
    SchemaViolation,
)
from scenelift.lifter import (
    LiftPrediction,
    NoisyOraclePredictor,
    OraclePredictor,
    PredictionContext,
    PredictorSpec,
)


@pytest.fixture(scope="module")
def frame():
    return generate_frame(SceneSpec(seed=1), CameraConfig(elevation_deg=18.0), 0)


def _ctx(frame, k, index=0):
    return PredictionContext(frame_id=frame.frame_id, frame_index=index, pose_index=k, ground_truth=frame)


def test_oracle_matches_ground_truth(frame):
    pred = OraclePredictor().predict(frame.poses2d[0], _ctx(frame, 0))
    assert pred.theta == frame.thetas[0]
    assert np.array_equal(pred.depth_offsets, frame.depth_offsets[0])


def test_oracle_requires_handle(frame):
    with pytest.raises(MissingGroundTruth):
        OraclePredictor().predict(frame.poses2d[0], None)


def test_oracle_lift_reproduces_camera_pose(frame):
    for k in range(2):
        pred = oracle_prediction(frame, k)
        lifted = lift_pose(frame.poses2d[k], pred, frame.c)
        assert np.max(np.abs(lifted.coords - frame.camera_poses[k].coords)) < 1e-9


def test_noisy_oracle_zero_noise_equals_oracle(frame):
    clean = OraclePredictor().predict(frame.poses2d[0], _ctx(frame, 0))
    noisy = NoisyOraclePredictor(0.0, 0.0, seed=9).predict(frame.poses2d[0], _ctx(frame, 0))
    assert noisy.theta == clean.theta
    assert np.array_equal(noisy.depth_offsets, clean.depth_offsets)


def test_noisy_oracle_deterministic_and_frame_shared_theta(frame):
    p = NoisyOraclePredictor(0.1, 0.05, seed=9)
    a = p.predict(frame.poses2d[0], _ctx(frame, 0))
    b = p.predict(frame.poses2d[0], _ctx(frame, 0))
    assert a.theta == b.theta
    assert np.array_equal(a.depth_offsets, b.depth_offsets)
    # elevation error is shared within a frame
    other = p.predict(frame.poses2d[1], _ctx(frame, 1))
    assert (a.theta - frame.thetas[0]) == pytest.approx(other.theta - frame.thetas[1], abs=1e-12)
    # distinct frames get distinct noise
    c = p.predict(frame.poses2d[0], PredictionContext(frame.frame_id, 5, 0, frame))
    assert c.theta != a.theta


def test_prediction_file_round_trip(tmp_path, frame):
    store = {
        (frame.frame_id, k): oracle_prediction(frame, k) for k in range(2)
    }
    path = tmp_path / "preds.json"
    save_predictions(path, store)
    loaded = load_predictions(path)
    assert set(loaded) == set(store)
    for key in store:
        assert loaded[key].theta == store[key].theta
        assert np.array_equal(loaded[key].depth_offsets, store[key].depth_offsets)

    predictor = make_predictor(PredictorSpec(kind="file", path=str(path)))
    got = predictor.predict(frame.poses2d[1], _ctx(frame, 1))
    assert got.theta == frame.thetas[1]

    with pytest.raises(PredictionNotFound, match="9999"):
        predictor.predict(frame.poses2d[0], PredictionContext("9999", 0, 0, None))


def test_file_predictions_drive_reconstruction(tmp_path, frame):
    path = tmp_path / "preds.json"
    save_predictions(path, {(frame.frame_id, k): oracle_prediction(frame, k) for k in range(2)})
    predictor = make_predictor(PredictorSpec(kind="file", path=str(path)))
    preds = [predictor.predict(frame.poses2d[k], _ctx(frame, k)) for k in range(2)]
    result = reconstruct(frame.poses2d, preds, MODES["full"], Constants(c=frame.c))
    metrics = evaluate_scene_pair(result.scene, frame.world)
    assert metrics.pa_mpjpe < 1e-6


def _write(path, payload):
    path.write_text(json.dumps(payload))
    return path


def test_load_predictions_counts(tmp_path):
    frames = [
        {"frame_id": f"{i:04d}",
         "poses": [{"pose_id": k, "theta_radians": 0.1, "depth_offsets": [0.0] * 18} for k in range(2)]}
        for i in range(5)
    ]
    path = _write(tmp_path / "p.json", {"schema_version": 1, "frames": frames})
    assert len(load_predictions(path)) == 10


def test_load_predictions_missing_theta(tmp_path):
    payload = {"schema_version": 1, "frames": [
        {"frame_id": "0000", "poses": [{"pose_id": 0, "depth_offsets": [0.0] * 18}]}
    ]}
    with pytest.raises(SchemaViolation, match=r"theta_radians"):
        load_predictions(_write(tmp_path / "p.json", payload))


def test_load_predictions_duplicate_key(tmp_path):
    pose = {"pose_id": 0, "theta_radians": 0.0, "depth_offsets": [0.0] * 18}
    payload = {"schema_version": 1, "frames": [
        {"frame_id": "0000", "poses": [pose, dict(pose)]}
    ]}
    with pytest.raises(SchemaViolation, match="duplicate"):
        load_predictions(_write(tmp_path / "p.json", payload))


def test_load_predictions_bad_version(tmp_path):
    with pytest.raises(SchemaViolation, match="schema_version"):
        load_predictions(_write(tmp_path / "p.json", {"schema_version": 99, "frames": []}))


def test_predictor_spec_validation():
    with pytest.raises(SchemaViolation):
        PredictorSpec(kind="magic")
    with pytest.raises(SchemaViolation):
        PredictorSpec(kind="noisy-oracle", sigma_d=-1.0)
    with pytest.raises(SchemaViolation):
        PredictorSpec(kind="file")


def test_lift_prediction_validation():
    with pytest.raises(Exception):
        LiftPrediction(np.array([0.0]), theta=2.0)  # |theta| >= pi/2


def test_noise_monotonicity_in_theta():
    # mean downstream PA-MPJPE is non-decreasing in sigma_theta
    spec = SceneSpec(seed=5)
    rng = np.random.default_rng(321)
    elevs = rng.uniform(5, 35, 200)
    frames = [generate_frame(spec, CameraConfig(elevation_deg=float(e)), i) for i, e in enumerate(elevs)]
    means = []
    for sigma in (0.0, 0.01, 0.05, 0.1):
        predictor = NoisyOraclePredictor(sigma_d=0.0, sigma_theta=sigma, seed=17)
        values = []
        for i, frame in enumerate(frames):
            preds = [predictor.predict(frame.poses2d[k], PredictionContext(frame.frame_id, i, k, frame))
                     for k in range(2)]
            result = reconstruct(frame.poses2d, preds, MODES["full"], Constants(c=frame.c))
            values.append(evaluate_scene_pair(result.scene, frame.world,
                                              mm_per_unit=frame.mm_per_unit).pa_mpjpe)
        means.append(float(np.mean(values)))
    assert all(means[i] <= means[i + 1] + 1e-12 for i in range(len(means) - 1)), means
