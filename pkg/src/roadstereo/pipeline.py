"""End-to-end orchestration: warp, match, restore, flatten, with timings."""

import time
from dataclasses import dataclass, field

import numpy as np

from .matching import MatcherParams, run_dense_matching, undo_perspective_shift
from .perspective import find_sparse_correspondences, fit_row_shift_model, warp_target
from .raster import as_gray, check_same_shape
from .roadmodel import (
    RollOptions,
    collect_samples,
    fit_road_model,
    transform_disparities,
)
from .metrics import transformed_stddev


@dataclass
class MatchOutcome:
    """Dense disparity map of a stereo pair plus intermediate products."""

    disparity: np.ndarray  # full disparities, perspective shift restored
    model: object  # GroundPlaneShiftModel
    matches: np.ndarray
    match_result: object  # matching.MatchResult (residual frame)
    timings: dict = field(default_factory=dict)


def match_stereo_pair(
    ref,
    tar,
    params=None,
    window=11,
    max_shift=64,
    response_threshold=20.0,
    workers=1,
):
    """Run perspective transform + dense matching + shift restoration.

    Timings (seconds, monotonic clock) are recorded per stage under the
    keys 'perspective', 'matching' and 'restore'.
    """
    if params is None:
        params = MatcherParams()
    ref = as_gray(ref)
    tar = as_gray(tar)
    check_same_shape(ref, tar, "reference and target images")
    timings = {}

    t0 = time.perf_counter()
    matches = find_sparse_correspondences(
        ref, tar, window=window, max_shift=max_shift,
        response_threshold=response_threshold,
    )
    model = fit_row_shift_model(matches, image_height=ref.shape[0])
    warped = warp_target(tar, model)
    timings["perspective"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = run_dense_matching(ref, warped, params, workers=workers)
    timings["matching"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    disparity = undo_perspective_shift(result.disparity, model)
    timings["restore"] = time.perf_counter() - t0

    return MatchOutcome(
        disparity=disparity,
        model=model,
        matches=matches,
        match_result=result,
        timings=timings,
    )


@dataclass
class FlattenOutcome:
    """Road-model fit and the flattened disparity map."""

    fit: object  # RoadModelFit
    transformed: np.ndarray
    sigma_d: float


def flatten_disparity(disp, mask=None, opts=None, delta_t=30.0, trim_3sigma=False):
    """Fit the road model (roll included) and flatten the disparity map.

    The fit uses masked samples when a mask is given; the transformation is
    applied to every valid pixel either way.
    """
    if opts is None:
        opts = RollOptions()
    samples = collect_samples(disp, mask)
    fit = fit_road_model(samples, opts, trim_3sigma=trim_3sigma)
    transformed = transform_disparities(disp, fit, delta_t=delta_t)
    sigma_d = transformed_stddev(transformed, mask)
    return FlattenOutcome(fit=fit, transformed=transformed, sigma_d=sigma_d)
