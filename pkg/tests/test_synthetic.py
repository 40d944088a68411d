"""Synthetic scene generator: ground truth, rendering, determinism."""

import numpy as np
import pytest

from roadstereo import (
    BadSceneError,
    Defect,
    SceneSpec,
    block_stats,
    fit_linear_model,
    ground_truth_disparity,
    render_stereo_pair,
    rotated_energy,
    collect_samples,
)
from roadstereo.synthetic import covisibility_mask
from scenes import constant_scene, scene_for


def test_grazing_axis_gives_constant_disparity():
    spec = constant_scene(d0=10.0, width=40, height=30)
    gt = ground_truth_disparity(spec)
    k = spec.t_c * spec.n_x / spec.beta
    assert np.allclose(gt, k * spec.f, atol=1e-10)
    assert np.ptp(gt, axis=0).max() <= 1e-10  # constant over v


def test_plane_disparity_is_exactly_affine_in_v():
    spec = scene_for(6.0, 0.09, psi=0.0, width=60, height=50)
    gt = ground_truth_disparity(spec)
    samples = collect_samples(gt)
    alpha, e_min = fit_linear_model(samples)
    a0, a1 = spec.plane_coefficients()
    assert alpha[0] == pytest.approx(a0, abs=1e-9)
    assert alpha[1] == pytest.approx(a1, abs=1e-11)
    assert e_min <= 1e-9


def test_rolled_plane_prefers_its_rotation_angle():
    spec = scene_for(6.0, 0.09, psi=0.05, width=60, height=50)
    samples = collect_samples(ground_truth_disparity(spec))
    _, e_zero = rotated_energy(samples, 0.0)
    _, e_true = rotated_energy(samples, 0.05)
    assert e_true <= 1e-6
    assert e_zero > e_true


def test_ground_truth_affine_in_rotated_row_for_any_roll():
    spec = scene_for(6.0, 0.09, psi=-0.08, width=50, height=40)
    samples = collect_samples(ground_truth_disparity(spec))
    _, e_min = rotated_energy(samples, -0.08)
    assert e_min <= 1e-9 * (1 + np.sum(samples[:, 2] ** 2))


def test_defects_change_ground_truth_only_inside_disks():
    base = scene_for(6.0, 0.08, width=80, height=60, texture_seed=2)
    dft = Defect(center=(30.0, 25.0), radius=7.0, depth_offset=-2.0)
    spec = scene_for(6.0, 0.08, width=80, height=60, texture_seed=2, defects=(dft,))
    g0 = ground_truth_disparity(base)
    g1 = ground_truth_disparity(spec)
    uu, vv = np.meshgrid(np.arange(80.0), np.arange(60.0))
    inside = (uu - 30.0) ** 2 + (vv - 25.0) ** 2 <= 49.0
    assert np.array_equal(g0[~inside], g1[~inside])
    assert np.allclose(g1[inside] - g0[inside], -2.0)


def test_negative_disparity_scene_rejected():
    # horizon crosses the image: top rows would need negative disparity
    with pytest.raises(BadSceneError):
        ground_truth_disparity(SceneSpec(theta=0.25, n_x=1.0))
    with pytest.raises(BadSceneError):
        ground_truth_disparity(
            scene_for(1.0, 0.05, defects=(Defect((10, 10), 4, -5.0),), width=64, height=48)
        )


def test_scene_validation():
    with pytest.raises(ValueError):
        SceneSpec(theta=0.0)
    with pytest.raises(ValueError):
        SceneSpec(t_c=-1.0)
    with pytest.raises(ValueError):
        Defect(center=(0, 0), radius=0.5, depth_offset=1.0)


def test_rendering_is_deterministic_and_seed_sensitive():
    spec = SceneSpec(width=64, height=48, texture_seed=5)
    r1, t1 = render_stereo_pair(spec)
    r2, t2 = render_stereo_pair(spec)
    assert np.array_equal(r1, r2) and np.array_equal(t1, t2)
    r3, _ = render_stereo_pair(SceneSpec(width=64, height=48, texture_seed=6))
    assert not np.array_equal(r1, r3)


def test_zero_disparity_scene_renders_identical_pair():
    spec = SceneSpec(width=48, height=36, n_x=0.0, texture_seed=4)
    assert np.all(ground_truth_disparity(spec) == 0.0)
    ref, tar = render_stereo_pair(spec)
    assert np.array_equal(ref, tar)


def test_constant_disparity_scene_is_pure_translation():
    spec = constant_scene(d0=10.0, width=60, height=30, texture_seed=9)
    ref, tar = render_stereo_pair(spec)
    assert np.array_equal(tar[:, : 60 - 10], ref[:, 10:])
    assert np.all(tar[:, 60 - 10 :] == 0)


def test_texture_has_variance_in_every_block():
    spec = SceneSpec(width=100, height=80, texture_seed=12)
    ref, _ = render_stereo_pair(spec)
    stats = block_stats(ref, 3)
    inner = stats.sigma[3:-3, 3:-3]
    assert np.all(inner > 0.0)


def test_noise_flag_is_seeded_and_optional():
    clean = SceneSpec(width=40, height=30, texture_seed=3)
    noisy = SceneSpec(width=40, height=30, texture_seed=3, noise_sigma=2.0)
    r0, t0 = render_stereo_pair(clean)
    r1, t1 = render_stereo_pair(noisy)
    r2, t2 = render_stereo_pair(noisy)
    assert np.array_equal(r1, r2) and np.array_equal(t1, t2)
    assert not np.array_equal(r0, r1)


def test_covisibility_mask():
    spec = constant_scene(d0=10.0, width=40, height=20)
    mask = covisibility_mask(spec)
    assert not mask[:, :10].any()
    assert mask[:, 10:].all()
