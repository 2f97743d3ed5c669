import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenelift import (
    DEFAULT_SKELETON,
    Constants,
    Pose2D,
    Scene3D,
    Pose3D,
    denormalize,
    load_skeleton,
    normalize_pose,
    save_skeleton,
)
from scenelift.errors import (
    DegeneratePose,
    JointCountMismatch,
    MissingJoint,
    NonFiniteInput,
    SchemaViolation,
)
from scenelift.skeleton import Skeleton

SK = DEFAULT_SKELETON


def _raw_pose(rng=None, root=(500.0, 400.0), head=(500.0, 300.0)):
    """Raw pixel dict with pelvis/head pinned and the rest scattered."""
    rng = rng or np.random.default_rng(0)
    raw = {}
    for name in SK.joints:
        raw[name] = tuple(rng.uniform(0, 1000, 2))
    raw["pelvis"] = root
    raw["left_hip"] = (root[0] - 20.0, root[1])
    raw["right_hip"] = (root[0] + 20.0, root[1])
    raw["head"] = head
    return raw


def test_normalize_head_example():
    # pelvis (500,400), head (500,300), c=10: 100 px map to 0.1 units
    pose = normalize_pose(_raw_pose(), SK)
    assert pose.norm_scale == pytest.approx(1000.0)
    # y grows upward: the head sits at +0.1
    assert pose.norm[SK.head_index] == pytest.approx([0.0, 0.1])
    assert np.all(pose.norm[SK.root_index] == 0.0)
    assert pose.root_pixel == pytest.approx([500.0, 400.0])
    # pixel data preserved unchanged
    assert pose.pixel[SK.head_index] == pytest.approx([500.0, 300.0])


def test_normalize_identity_scale():
    # head 0.1 px above the root: scale is already 1 px/unit
    raw = _raw_pose(root=(0.0, 0.0), head=(0.0, -0.1))
    raw["left_hip"], raw["right_hip"] = (-0.02, 0.0), (0.02, 0.0)
    pose = normalize_pose(raw, SK)
    assert pose.norm_scale == pytest.approx(1.0)
    assert pose.norm[SK.head_index] == pytest.approx([0.0, 0.1])


def test_normalize_head_to_root_is_exactly_inverse_c():
    rng = np.random.default_rng(42)
    for _ in range(200):
        pose = normalize_pose(_raw_pose(rng, root=tuple(rng.uniform(0, 2000, 2)),
                                        head=tuple(rng.uniform(0, 2000, 2))), SK)
        dist = np.hypot(*pose.norm[SK.head_index])
        assert abs(dist - 0.1) < 1e-9
        assert pose.norm_scale > 0


def test_degenerate_pose():
    with pytest.raises(DegeneratePose):
        normalize_pose(_raw_pose(head=(500.0, 400.0)), SK)


def test_missing_joint():
    raw = _raw_pose()
    del raw["left_knee"]
    with pytest.raises(MissingJoint, match="left_knee"):
        normalize_pose(raw, SK)


def test_root_synthesized_from_hips():
    raw = _raw_pose()
    del raw["pelvis"]
    pose = normalize_pose(raw, SK)
    assert pose.root_pixel == pytest.approx([500.0, 400.0])


def test_denormalize_head_example():
    pose = normalize_pose(_raw_pose(), SK)
    px = denormalize(pose)
    assert px[SK.head_index] == pytest.approx([500.0, 300.0])
    assert px[SK.root_index] == pytest.approx([500.0, 400.0])


def test_denormalize_round_trip_sweep():
    rng = np.random.default_rng(7)
    for _ in range(100):
        raw = _raw_pose(rng, root=tuple(rng.uniform(-500, 2500, 2)),
                        head=tuple(rng.uniform(-500, 2500, 2)))
        if np.hypot(raw["head"][0] - raw["pelvis"][0], raw["head"][1] - raw["pelvis"][1]) < 1e-3:
            continue
        pose = normalize_pose(raw, SK)
        expected = np.array([raw[name] for name in SK.joints])
        assert np.max(np.abs(denormalize(pose) - expected)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(
    ux=st.floats(-1e4, 1e4), uy=st.floats(-1e4, 1e4),
    hx=st.floats(-1e4, 1e4), hy=st.floats(-1e4, 1e4),
)
def test_denormalize_round_trip_property(ux, uy, hx, hy):
    if np.hypot(hx - ux, hy - uy) < 1e-3:
        return
    raw = _raw_pose(root=(ux, uy), head=(hx, hy))
    pose = normalize_pose(raw, SK)
    expected = np.array([raw[name] for name in SK.joints])
    assert np.max(np.abs(denormalize(pose) - expected)) < 1e-6


def test_array_input_and_shape_check():
    raw = np.array([_raw_pose()[name] for name in SK.joints])
    pose = normalize_pose(raw, SK)
    assert pose.norm_scale == pytest.approx(1000.0)
    with pytest.raises(JointCountMismatch):
        normalize_pose(raw[:5], SK)


def test_constants_validation():
    assert Constants().c == 10.0
    assert Constants().contact_threshold_px == 50.0
    with pytest.raises(NonFiniteInput):
        Constants(c=0.5)
    with pytest.raises(NonFiniteInput):
        Constants(contact_threshold_px=-1.0)


def test_types_are_frozen():
    pose = normalize_pose(_raw_pose(), SK)
    with pytest.raises(ValueError):
        pose.norm[0, 0] = 5.0
    p3 = Pose3D(SK, np.zeros((len(SK), 3)))
    with pytest.raises(ValueError):
        p3.coords[0, 0] = 1.0


def test_scene_requires_two_poses():
    p3 = Pose3D(SK, np.random.default_rng(0).normal(size=(len(SK), 3)))
    with pytest.raises(JointCountMismatch):
        Scene3D(SK, (p3,), np.zeros((1, 3)))


def test_skeleton_roundtrip_and_validation(tmp_path):
    path = tmp_path / "skeleton.json"
    save_skeleton(SK, path)
    loaded = load_skeleton(path)
    assert loaded == SK

    bad = SK.to_dict()
    bad["root"] = "no_such_joint"
    path.write_text(json.dumps(bad))
    with pytest.raises(SchemaViolation):
        load_skeleton(path)

    with pytest.raises(SchemaViolation):
        Skeleton(joints=("a", "b"), root="a", head="a", feet=("b",), left_hip="a", right_hip="b")
