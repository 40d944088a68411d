"""Row-shift model estimation and target warping."""

import numpy as np
import pytest

from roadstereo import (
    GroundPlaneShiftModel,
    InsufficientMatchesError,
    RankDeficientError,
    find_sparse_correspondences,
    fit_row_shift_model,
    ground_truth_disparity,
    render_stereo_pair,
    warp_target,
)
from scenes import scene_for


def matches_from(vs, deltas):
    vs = np.asarray(vs, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    u_ref = np.full_like(vs, 100.0)
    return np.column_stack([u_ref, u_ref - deltas, vs])


def test_fit_exact_affine_machine_precision():
    vs = np.arange(0.0, 50.0, 7.0)
    model = fit_row_shift_model(matches_from(vs, 3.0 + 0.1 * vs), image_height=60)
    assert model.kappa0 == pytest.approx(3.0, abs=1e-12)
    assert model.kappa1 == pytest.approx(0.1, abs=1e-13)


def test_fit_three_point_hand_case():
    model = fit_row_shift_model(
        matches_from([0.0, 10.0, 20.0], [2.0, 4.0, 6.0]), image_height=30
    )
    assert model.kappa0 == pytest.approx(2.0, abs=1e-12)
    assert model.kappa1 == pytest.approx(0.2, abs=1e-13)
    assert model.delta_p == 2  # floor of the smallest shift over rows [0, 30)


def test_fit_single_row_rank_deficient():
    with pytest.raises(RankDeficientError):
        fit_row_shift_model(matches_from([5.0, 5.0], [2.0, 3.0]), image_height=10)


def test_fit_too_few_matches():
    with pytest.raises(RankDeficientError):
        fit_row_shift_model(matches_from([5.0], [2.0]), image_height=10)


def test_fit_permutation_invariant():
    rng = np.random.default_rng(0)
    vs = rng.uniform(0, 100, size=40)
    deltas = 4.0 + 0.05 * vs + rng.normal(0, 0.3, size=40)
    m = matches_from(vs, deltas)
    a = fit_row_shift_model(m, image_height=120)
    b = fit_row_shift_model(m[rng.permutation(40)], image_height=120)
    assert a.kappa0 == pytest.approx(b.kappa0, abs=1e-9)
    assert a.kappa1 == pytest.approx(b.kappa1, abs=1e-12)
    assert a.delta_p == b.delta_p


def test_fit_outlier_trim_pass():
    vs = np.arange(0.0, 40.0)
    deltas = 5.0 + 0.1 * vs
    m = matches_from(vs, deltas)
    m[3, 1] -= 25.0  # one gross mismatch
    model = fit_row_shift_model(m, image_height=50)
    assert model.kappa0 == pytest.approx(5.0, abs=1e-9)
    assert model.kappa1 == pytest.approx(0.1, abs=1e-10)


def test_correspondences_uniform_shift():
    rng = np.random.default_rng(7)
    ref = rng.integers(0, 256, size=(40, 90)).astype(np.uint8)
    tar = np.zeros_like(ref)
    tar[:, 5:] = ref[:, :-5]  # shifted 5 px right
    matches = find_sparse_correspondences(ref, tar, window=9, max_shift=10)
    assert len(matches) >= 2
    deltas = matches[:, 0] - matches[:, 1]
    assert np.all(deltas == -5.0)


def test_correspondences_textureless_error():
    flat = np.full((30, 40), 128, dtype=np.uint8)
    with pytest.raises(InsufficientMatchesError):
        find_sparse_correspondences(flat, flat)


def test_correspondences_window_validation():
    img = np.zeros((10, 10), dtype=np.uint8)
    with pytest.raises(ValueError):
        find_sparse_correspondences(img, img, window=8)


def test_correspondences_match_analytic_shift_on_plane_scene():
    spec = scene_for(4.0, 0.08, texture_seed=5)
    ref, tar = render_stereo_pair(spec)
    a0, a1 = spec.plane_coefficients()
    matches = find_sparse_correspondences(ref, tar, max_shift=40)
    deltas = matches[:, 0] - matches[:, 1]
    analytic = a0 + a1 * matches[:, 2]
    assert np.all(np.abs(deltas - analytic) <= 1.0)


def test_warp_identity():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(12, 20)).astype(np.uint8)
    model = GroundPlaneShiftModel(kappa0=0.0, kappa1=0.0, delta_p=0)
    assert np.array_equal(warp_target(img, model), img)


def test_warp_uniform_integer_shift():
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, size=(6, 10)).astype(np.uint8)
    model = GroundPlaneShiftModel(kappa0=4.0, kappa1=0.0, delta_p=0)
    out = warp_target(img, model)
    assert np.array_equal(out[:, 4:], img[:, :-4])
    assert np.all(out[:, :4] == 0)


def test_warp_restores_source_pixels_in_range():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(25, 40)).astype(np.uint8)
    model = GroundPlaneShiftModel(kappa0=2.2, kappa1=0.21, delta_p=1)
    out = warp_target(img, model)
    shifts = model.row_shift(np.arange(25))
    for v in range(25):
        s = int(shifts[v])
        assert np.array_equal(out[v, s:], img[v, : 40 - s])


def test_row_shift_equals_rounded_delta_minus_offset():
    model = GroundPlaneShiftModel(kappa0=3.7, kappa1=0.13, delta_p=3)
    v = np.arange(50)
    expect = np.floor(model.delta_u(v) + 0.5).astype(int) - 3
    assert np.array_equal(model.row_shift(v), expect)


def test_residual_disparity_range_shrinks_on_plane_scene():
    spec = scene_for(5.0, 0.09, psi=0.0, texture_seed=9)
    gt = ground_truth_disparity(spec)
    ref, tar = render_stereo_pair(spec)
    matches = find_sparse_correspondences(ref, tar, max_shift=40)
    model = fit_row_shift_model(matches, image_height=spec.height)
    residual = gt - (model.delta_u(np.arange(spec.height))[:, None] - model.delta_p)
    hi = np.ceil(model.delta_u(np.arange(spec.height)).max() - model.delta_p) + 1
    assert residual.min() >= 0.0 - 1e-6
    assert residual.max() <= hi
    # per-row spread collapses to the rounding band
    spread = residual.max(axis=1) - residual.min(axis=1)
    assert np.all(spread <= 2.0)
