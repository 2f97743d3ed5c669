import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from scenelift import (
    DEFAULT_SKELETON,
    Pose3D,
    Scene3D,
    align_scene,
    evaluate_scene_pair,
    pa_mpjpe,
    root_displacement_error,
    scale_error,
    translation_error,
)
from scenelift.errors import DegenerateConfiguration, ScenePairMismatch, ZeroNormPose
from scenelift.geometry import is_rotation_matrix
from scenelift.metrics import aggregate_metrics, umeyama

SK = DEFAULT_SKELETON
J = len(SK)


def random_scene(rng, n_poses=2, spread=2.0):
    poses = []
    roots = []
    for _ in range(n_poses):
        root = rng.normal(scale=spread, size=3)
        coords = root + rng.normal(scale=0.6, size=(J, 3))
        coords[SK.root_index] = root
        poses.append(Pose3D(SK, coords))
        roots.append(root)
    return Scene3D(SK, tuple(poses), np.stack(roots))


def random_similarity(rng):
    # random proper rotation via QR
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    s = rng.uniform(0.3, 3.0)
    t = rng.normal(scale=5.0, size=3)
    return s, q, t


def apply_similarity(scene, s, r, t):
    poses = tuple(Pose3D(SK, s * p.coords @ r.T + t) for p in scene.poses)
    return Scene3D(SK, poses, s * scene.root_offsets @ r.T + t)


def independent_alignment(src, dst):
    """Umeyama via a different code path: scipy's Kabsch solver (proper
    rotation) plus the least-squares scale/translation formulas."""
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    xs, xd = src - mu_s, dst - mu_d
    rot = Rotation.align_vectors(xd, xs)[0].as_matrix()
    scale = np.trace(rot @ xs.T @ xd) / np.sum(xs * xs)
    trans = mu_d - scale * rot @ mu_s
    return scale, rot, trans


def test_align_identity():
    scene = random_scene(np.random.default_rng(0))
    transform, aligned = align_scene(scene, scene)
    assert transform.scale == pytest.approx(1.0)
    assert np.allclose(transform.rotation, np.eye(3), atol=1e-9)
    assert np.allclose(transform.translation, 0.0, atol=1e-9)
    assert pa_mpjpe(scene, scene) == pytest.approx(0.0, abs=1e-12)


def test_align_recovers_inverse_scale():
    scene = random_scene(np.random.default_rng(1))
    doubled = apply_similarity(scene, 2.0, np.eye(3), np.array([1.0, 0.0, 0.0]))
    transform, aligned = align_scene(doubled, scene)
    assert transform.scale == pytest.approx(0.5)
    assert np.max(np.abs(aligned.joint_matrix() - scene.joint_matrix())) < 1e-9


def test_align_exact_similarity_recovery_sweep():
    rng = np.random.default_rng(2)
    for _ in range(200):
        scene = random_scene(rng)
        s, r, t = random_similarity(rng)
        moved = apply_similarity(scene, s, r, t)
        _, aligned = align_scene(moved, scene)
        assert np.max(np.abs(aligned.joint_matrix() - scene.joint_matrix())) < 1e-9


def test_align_beats_random_transforms():
    rng = np.random.default_rng(3)
    for _ in range(5):
        pred = random_scene(rng)
        gt = random_scene(rng)
        transform, aligned = align_scene(pred, gt)
        best = np.mean(np.sum((aligned.joint_matrix() - gt.joint_matrix()) ** 2, axis=1))
        src = pred.joint_matrix()
        dst = gt.joint_matrix()
        for _ in range(2000):
            s, r, t = random_similarity(rng)
            resid = np.mean(np.sum((s * src @ r.T + t - dst) ** 2, axis=1))
            assert resid >= best - 1e-9


def test_align_quotient_property():
    # residual invariant under any pre-applied similarity of the prediction
    rng = np.random.default_rng(4)
    pred = random_scene(rng)
    gt = random_scene(rng)
    base = pa_mpjpe(pred, gt)
    for _ in range(20):
        s, r, t = random_similarity(rng)
        assert pa_mpjpe(apply_similarity(pred, s, r, t), gt) == pytest.approx(base, abs=1e-9)


def test_align_rigid_scene_property():
    rng = np.random.default_rng(5)
    pred = random_scene(rng)
    gt = random_scene(rng)
    transform, aligned = align_scene(pred, gt)
    assert is_rotation_matrix(transform.rotation, tol=1e-9)
    before = np.linalg.norm(pred.poses[0].coords[:, None] - pred.poses[1].coords[None, :], axis=2)
    after = np.linalg.norm(aligned.poses[0].coords[:, None] - aligned.poses[1].coords[None, :], axis=2)
    assert np.max(np.abs(after - transform.scale * before)) < 1e-9


def test_align_degenerate():
    coincident = Scene3D(
        SK,
        (Pose3D(SK, np.ones((J, 3))), Pose3D(SK, np.ones((J, 3)))),
        np.ones((2, 3)),
    )
    gt = random_scene(np.random.default_rng(6))
    with pytest.raises(DegenerateConfiguration):
        align_scene(coincident, gt)


def test_pair_mismatch():
    rng = np.random.default_rng(7)
    with pytest.raises(ScenePairMismatch):
        align_scene(random_scene(rng, 2), random_scene(rng, 3))


def test_pa_mpjpe_uniform_offset_example():
    # one pose offset by 5 mm on every joint: pooled pre-alignment mean is
    # 2.5 mm; the post-alignment value is checked against the test's own
    # independent alignment
    rng = np.random.default_rng(8)
    gt = random_scene(rng)
    offset = np.array([5.0, 0.0, 0.0])
    pred_poses = (Pose3D(SK, gt.poses[0].coords.copy()), Pose3D(SK, gt.poses[1].coords + offset))
    pred = Scene3D(SK, pred_poses, np.stack([gt.root_offsets[0], gt.root_offsets[1] + offset]))

    pre_align = np.mean(np.linalg.norm(pred.joint_matrix() - gt.joint_matrix(), axis=1))
    assert pre_align == pytest.approx(2.5)

    s, r, t = independent_alignment(pred.joint_matrix(), gt.joint_matrix())
    expected = np.mean(np.linalg.norm((s * pred.joint_matrix() @ r.T + t) - gt.joint_matrix(), axis=1))
    assert pa_mpjpe(pred, gt) == pytest.approx(expected, abs=1e-9)
    assert pa_mpjpe(pred, gt) <= pre_align


def test_scale_error_examples():
    rng = np.random.default_rng(9)
    gt = random_scene(rng)
    assert scale_error(gt, gt) == pytest.approx((0.0, 0.0))

    # both poses 5% larger about their roots, alignment held fixed
    bigger = tuple(
        Pose3D(SK, p.root + 1.05 * (p.coords - p.root)) for p in gt.poses
    )
    pred = Scene3D(SK, bigger, gt.root_offsets)
    se_mm, se_pct = scale_error(pred, gt)
    assert se_pct == pytest.approx(5.0)
    assert se_mm > 0


def test_scale_error_zero_norm():
    gt = random_scene(np.random.default_rng(10))
    flat = Scene3D(SK, (Pose3D(SK, np.zeros((J, 3))), gt.poses[1]), gt.root_offsets)
    with pytest.raises(ZeroNormPose):
        scale_error(gt, flat)


def test_translation_error_345():
    gt = random_scene(np.random.default_rng(11))
    offset = np.array([3.0, 0.0, 4.0])
    pred = Scene3D(SK, tuple(Pose3D(SK, p.coords + offset) for p in gt.poses),
                   gt.root_offsets + offset)
    assert translation_error(pred, gt) == pytest.approx(5.0)
    # relabeling both scenes' poses leaves TE unchanged
    flip = Scene3D(SK, (pred.poses[1], pred.poses[0]), pred.root_offsets[::-1])
    flip_gt = Scene3D(SK, (gt.poses[1], gt.poses[0]), gt.root_offsets[::-1])
    assert translation_error(flip, flip_gt) == pytest.approx(5.0)


def test_rde_examples():
    gt = random_scene(np.random.default_rng(12))
    assert root_displacement_error(gt, gt) == pytest.approx(0.0)

    base = gt.root_offsets[0]
    pred_roots = np.stack([base, base + np.array([100.0, 0.0, 0.0])])
    gt_roots = np.stack([base, base + np.array([100.0, 0.0, 50.0])])

    def scene_with_roots(roots):
        poses = tuple(
            Pose3D(SK, gt.poses[k].coords - gt.root_offsets[k] + roots[k]) for k in range(2)
        )
        return Scene3D(SK, poses, roots)

    pred = scene_with_roots(pred_roots)
    target = scene_with_roots(gt_roots)
    assert root_displacement_error(pred, target) == pytest.approx(50.0)
    assert root_displacement_error(pred, target, magnitude_only=True) == pytest.approx(
        abs(100.0 - np.hypot(100.0, 50.0))
    )
    # swapping both scenes' pose order leaves RDE unchanged
    swap = lambda s: Scene3D(SK, (s.poses[1], s.poses[0]), s.root_offsets[::-1])
    assert root_displacement_error(swap(pred), swap(target)) == pytest.approx(50.0)


def test_metrics_match_independent_recomputation():
    rng = np.random.default_rng(13)
    for _ in range(100):
        pred = random_scene(rng)
        gt = random_scene(rng)
        _, aligned = align_scene(pred, gt)

        # definition-level recomputation with plain loops
        dists = [float(np.linalg.norm(a - b))
                 for a, b in zip(aligned.joint_matrix(), gt.joint_matrix())]
        pa_ref = sum(dists) / len(dists)

        se_vals, pct_vals = [], []
        for pp, gp in zip(aligned.poses, gt.poses):
            pn = float(np.sqrt(np.sum((pp.coords - pp.root) ** 2)))
            gn = float(np.sqrt(np.sum((gp.coords - gp.root) ** 2)))
            se_vals.append(pn - gn)
            pct_vals.append((pn - gn) / gn * 100.0)
        te_vec = np.mean([np.abs(aligned.root_offsets[k] - gt.root_offsets[k]) for k in range(2)], axis=0)
        te_ref = float(np.sqrt(np.sum(te_vec ** 2)))
        rde_ref = float(np.linalg.norm(
            (aligned.root_offsets[1] - aligned.root_offsets[0])
            - (gt.root_offsets[1] - gt.root_offsets[0])
        ))

        assert pa_mpjpe(pred, gt) == pytest.approx(pa_ref, abs=1e-9)
        se_mm, se_pct = scale_error(aligned, gt)
        assert se_mm == pytest.approx(float(np.mean(se_vals)), abs=1e-9)
        assert se_pct == pytest.approx(float(np.mean(pct_vals)), abs=1e-9)
        assert translation_error(aligned, gt) == pytest.approx(te_ref, abs=1e-9)
        assert root_displacement_error(aligned, gt) == pytest.approx(rde_ref, abs=1e-9)

        fm = evaluate_scene_pair(pred, gt)
        assert fm.pa_mpjpe == pytest.approx(pa_ref, abs=1e-9)
        assert fm.se_percent == pytest.approx(float(np.mean(pct_vals)), abs=1e-9)
        assert fm.se_mm == pytest.approx(float(np.mean(np.abs(se_vals))), abs=1e-9)
        assert fm.te == pytest.approx(te_ref, abs=1e-9)
        assert fm.rde == pytest.approx(rde_ref, abs=1e-9)


def test_umeyama_against_scipy_path():
    rng = np.random.default_rng(14)
    for _ in range(50):
        src = rng.normal(size=(40, 3))
        dst = rng.normal(size=(40, 3))
        ours = umeyama(src, dst)
        s, r, t = independent_alignment(src, dst)
        assert ours.scale == pytest.approx(s, abs=1e-9)
        assert np.max(np.abs(ours.rotation - r)) < 1e-9
        assert np.max(np.abs(ours.translation - t)) < 1e-9


def test_aggregate_is_arithmetic_mean():
    rng = np.random.default_rng(15)
    frames = [evaluate_scene_pair(random_scene(rng), random_scene(rng), frame_id=str(i))
              for i in range(7)]
    report = aggregate_metrics(frames)
    assert report.pa_mpjpe == pytest.approx(np.mean([f.pa_mpjpe for f in frames]))
    assert report.rde == pytest.approx(np.mean([f.rde for f in frames]))
    assert len(report.frames) == 7
    assert report.se_mm >= 0.0 and report.pa_mpjpe >= 0.0
