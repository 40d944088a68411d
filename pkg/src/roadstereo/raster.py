"""Raster conventions shared by every module.

Three array types flow through the pipeline, all row-major 2-D numpy
arrays indexed ``[v, u]`` (row, column):

* gray image   -- ``uint8``, intensities stored exactly as read, no rescale.
* disparity map -- ``float64``, fractional disparities in pixels; pixels with
  no estimate carry ``NaN`` (the single INVALID marker used everywhere).
* road mask    -- ``bool``, True marks a road pixel.

A true disparity of 0.0 is therefore distinct from INVALID: removed or
never-estimated pixels must be skipped by downstream fits, not treated as
zeros.
"""

import numpy as np

INVALID = np.nan


def valid_mask(disp):
    """Boolean mask of pixels that carry a disparity estimate."""
    return np.isfinite(disp)


def invalid_map(height, width):
    """Disparity map of the given shape with every pixel INVALID."""
    return np.full((height, width), INVALID, dtype=np.float64)


def as_gray(img):
    """Validate and return an image as a 2-D uint8 array."""
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {a.shape}")
    if a.dtype != np.uint8:
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueError(f"gray image must be integer-typed, got {a.dtype}")
        if a.size and (a.min() < 0 or a.max() > 255):
            raise ValueError("gray image values must lie in [0, 255]")
        a = a.astype(np.uint8)
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("gray image must be at least 1x1")
    return a


def as_disparity(disp):
    """Validate and return a disparity map as a 2-D float64 array.

    Valid entries must be finite and non-negative; NaN marks INVALID.
    """
    a = np.asarray(disp, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"disparity map must be 2-D, got shape {a.shape}")
    v = a[np.isfinite(a)]
    if v.size and v.min() < 0:
        raise ValueError("valid disparities must be >= 0")
    return a


def check_same_shape(a, b, what="inputs"):
    if a.shape != b.shape:
        raise ValueError(f"{what} differ in size: {a.shape[::-1]} vs {b.shape[::-1]}")
