"""Integral-image block sums over 8-bit rasters.

All sums are carried in int64, so every intermediate value is exact: block
sums computed here are bit-identical to direct per-pixel accumulation in any
order. Down-stream float arithmetic therefore starts from identical integers
no matter how the sums were obtained.
"""

import numpy as np


def window_sum(a, radius):
    """Sum of ``a`` over the (2r+1)x(2r+1) window centred at each pixel.

    Returns an int64 array of the same shape. Entries whose window leaves the
    image are left at 0 and must be masked by the caller (see
    :func:`interior_mask`).
    """
    a = np.asarray(a, dtype=np.int64)
    h, w = a.shape
    r = int(radius)
    out = np.zeros((h, w), dtype=np.int64)
    if 2 * r + 1 > h or 2 * r + 1 > w:
        return out
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=sat[1:, 1:])
    k = 2 * r + 1
    out[r : h - r, r : w - r] = (
        sat[k : h + 1, k : w + 1]
        - sat[0 : h - 2 * r, k : w + 1]
        - sat[k : h + 1, 0 : w - 2 * r]
        + sat[0 : h - 2 * r, 0 : w - 2 * r]
    )
    return out


def interior_mask(shape, radius):
    """Boolean mask of pixels whose (2r+1)^2 window fits inside the raster."""
    h, w = shape
    r = int(radius)
    m = np.zeros((h, w), dtype=bool)
    if 2 * r + 1 <= h and 2 * r + 1 <= w:
        m[r : h - r, r : w - r] = True
    return m


def block_mean_std(img, radius):
    """Population mean and standard deviation over each (2r+1)^2 block.

    Both outputs are float64 with NaN wherever the window leaves the image.
    Variance is computed as E[x^2] - mean^2 from exact integer sums and
    clamped at zero.
    """
    img = np.asarray(img, dtype=np.int64)
    n = (2 * int(radius) + 1) ** 2
    s = window_sum(img, radius)
    sq = window_sum(img * img, radius)
    mu = s / n
    var = sq / n - mu * mu
    var = np.maximum(var, 0.0)
    sigma = np.sqrt(var)
    inside = interior_mask(img.shape, radius)
    mu[~inside] = np.nan
    sigma[~inside] = np.nan
    return mu, sigma
