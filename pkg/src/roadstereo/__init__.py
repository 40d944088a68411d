"""roadstereo: dense subpixel stereo and road-surface flattening.

The pipeline turns a rectified stereo pair of a road scene into a
disparity map in which damaged road regions stand out as statistical
outliers:

1. ``perspective``: estimate the affine per-row shift of the ground plane
   and warp the target image so the road looks alike in both views.
2. ``matching``: normalized-correlation block costs, bilateral cost
   aggregation, winner-take-all, left-right consistency, subpixel
   refinement.
3. ``roadmodel``: fit the road's disparity projection against the rotated
   row coordinate, estimate the roll angle by energy minimisation and
   flatten the map.
4. ``synthetic`` renders deterministic test scenes with exact ground
   truth; ``metrics`` provides accuracy and throughput measures;
   ``fileio`` reads and writes PGM, PNG, PFM and CSV artifacts.
"""

__version__ = "0.1.0"

from .errors import (
    BadSceneError,
    DegenerateBlockError,
    DisparityOverflowError,
    FormatError,
    InsufficientMatchesError,
    NoSamplesError,
    RankDeficientError,
    RoadStereoError,
    TruncatedPayloadError,
    UnsupportedDepthError,
)
from .raster import INVALID, as_disparity, as_gray, invalid_map, valid_mask
from .fileio import (
    load_disparity,
    load_disparity_pfm,
    load_disparity_png16,
    load_gray_image,
    load_pgm,
    save_disparity,
    save_disparity_csv,
    save_disparity_pfm,
    save_disparity_png16,
    save_gray_image,
    save_pgm,
)
from .perspective import (
    GroundPlaneShiftModel,
    find_sparse_correspondences,
    fit_row_shift_model,
    warp_target,
)
from .matching import (
    BlockStats,
    MatcherParams,
    MatchResult,
    aggregate_costs,
    bilateral_weight,
    block_stats,
    compute_cost_volumes,
    lr_consistency,
    matching_cost,
    run_dense_matching,
    subpixel_refine,
    undo_perspective_shift,
    wta_disparity,
)
from .roadmodel import (
    RoadModelFit,
    RollOptions,
    collect_samples,
    energy_gradient,
    estimate_roll,
    fit_linear_model,
    fit_road_model,
    rotated_energy,
    transform_disparities,
    wrap_roll_angle,
)
from .synthetic import Defect, SceneSpec, ground_truth_disparity, render_stereo_pair
from .metrics import (
    EvalReport,
    error_percentage,
    evaluate,
    mde_per_second,
    rmse,
    transformed_stddev,
)
from .pipeline import (
    FlattenOutcome,
    MatchOutcome,
    flatten_disparity,
    match_stereo_pair,
)
