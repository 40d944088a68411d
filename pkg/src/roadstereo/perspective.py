"""Ground-plane row-shift estimation and target-image warping.

For a tilted stereo rig looking at a road plane, the horizontal offset
between the two views of a ground point is affine in the image row:
``delta_u(v) = kappa0 + kappa1 * v``. Shifting each target row right by the
rounded ``delta_u(v) - delta_p`` makes the road appear nearly identical in
both views, so the dense matcher only has to search a small residual range.

Correspondences are an (m, 3) float64 array with columns
``(u_ref, u_tar, v)``; both pixels of a pair lie on the same row.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._sums import block_mean_std, interior_mask, window_sum
from .errors import InsufficientMatchesError, RankDeficientError
from .raster import as_gray, check_same_shape

MIN_CORRELATION = 0.9
TRIM_RESIDUAL = 3.0  # px; one outlier-rejection pass after the initial fit


@dataclass(frozen=True)
class GroundPlaneShiftModel:
    """Affine per-row shift of the road plane plus its non-negativity offset.

    ``delta_p`` is an integer chosen so that ``delta_u(v) - delta_p >= 0``
    on every image row, which keeps all residual disparities non-negative.
    """

    kappa0: float
    kappa1: float
    delta_p: int

    def delta_u(self, v):
        """Ideal (fractional) row shift at row v."""
        return self.kappa0 + self.kappa1 * np.asarray(v, dtype=np.float64)

    def row_shift(self, v):
        """Integer shift applied to row v by :func:`warp_target`.

        Nearest integer of ``delta_u(v) - delta_p`` (half rounds up). Because
        ``delta_p`` is an integer this equals ``round(delta_u(v)) - delta_p``,
        the amount added back by ``matching.undo_perspective_shift``.
        """
        return np.floor(self.delta_u(v) - self.delta_p + 0.5).astype(np.int64)


def find_sparse_correspondences(
    ref, tar, window=11, max_shift=64, response_threshold=20.0, stride=None
):
    """Row-aligned matches between ref and tar by exhaustive shift search.

    Candidate pixels are taken on a regular grid and kept when their local
    intensity variance exceeds ``response_threshold``. For each candidate the
    normalized correlation against the target row is evaluated at every
    integer shift in [-max_shift, max_shift]; the best shift wins and the
    match is kept only when its correlation is at least 0.9.

    Returns an (m, 3) array with columns (u_ref, u_tar, v).
    Raises InsufficientMatchesError when fewer than 2 matches survive.
    """
    ref = as_gray(ref)
    tar = as_gray(tar)
    check_same_shape(ref, tar, "reference and target images")
    if window % 2 != 1 or window < 3:
        raise ValueError("window must be odd and >= 3")
    h, w = ref.shape
    r = window // 2
    n = (2 * r + 1) ** 2
    if stride is None:
        stride = max(2, window // 2)

    mu_r, sg_r = block_mean_std(ref, r)
    mu_t, sg_t = block_mean_std(tar, r)
    inside = interior_mask(ref.shape, r)
    variance = np.where(inside, sg_r * sg_r, 0.0)

    ref64 = ref.astype(np.int64)
    tar64 = tar.astype(np.int64)

    best_ncc = np.full((h, w), -np.inf)
    best_shift = np.zeros((h, w), dtype=np.int64)
    for s in range(-int(max_shift), int(max_shift) + 1):
        if abs(s) >= w:
            continue
        # product image ref(u) * tar(u + s), zero where u + s is outside
        prod = np.zeros((h, w), dtype=np.int64)
        if s >= 0:
            prod[:, : w - s] = ref64[:, : w - s] * tar64[:, s:]
        else:
            prod[:, -s:] = ref64[:, -s:] * tar64[:, : w + s]
        cross = window_sum(prod, r)
        # shifted target stats aligned to reference coordinates
        mu_ts = np.full((h, w), np.nan)
        sg_ts = np.full((h, w), np.nan)
        if s >= 0:
            mu_ts[:, : w - s] = mu_t[:, s:]
            sg_ts[:, : w - s] = sg_t[:, s:]
        else:
            mu_ts[:, -s:] = mu_t[:, : w + s]
            sg_ts[:, -s:] = sg_t[:, : w + s]
        with np.errstate(invalid="ignore", divide="ignore"):
            ncc = (cross / n - mu_r * mu_ts) / (sg_r * sg_ts)
        ok = inside & np.isfinite(ncc)
        better = ok & (ncc > best_ncc)
        best_ncc[better] = ncc[better]
        best_shift[better] = s

    vv, uu = np.meshgrid(
        np.arange(r, h - r, stride), np.arange(r, w - r, stride), indexing="ij"
    )
    vv = vv.ravel()
    uu = uu.ravel()
    keep = (variance[vv, uu] > response_threshold) & (
        best_ncc[vv, uu] >= MIN_CORRELATION
    )
    vv, uu = vv[keep], uu[keep]
    if len(vv) < 2:
        raise InsufficientMatchesError(
            f"only {len(vv)} reliable correspondences found (need >= 2)"
        )
    matches = np.column_stack(
        [
            uu.astype(np.float64),
            (uu + best_shift[vv, uu]).astype(np.float64),
            vv.astype(np.float64),
        ]
    )
    return matches


def _affine_fit(v, delta):
    m = len(v)
    sy = v.sum()
    syy = (v * v).sum()
    sd = delta.sum()
    syd = (v * delta).sum()
    det = m * syy - sy * sy
    mean_v = sy / m
    var_v = syy / m - mean_v * mean_v
    if m < 2 or var_v <= 1e-12 * max(1.0, mean_v * mean_v):
        raise RankDeficientError("matches span fewer than 2 distinct rows")
    k0 = (syy * sd - sy * syd) / det
    k1 = (m * syd - sy * sd) / det
    return k0, k1


def fit_row_shift_model(matches, image_height):
    """Least-squares fit of the per-row shift ``u_ref - u_tar`` against v.

    One outlier-rejection pass: matches further than 3 px from the initial
    fit are dropped and the fit repeated, provided enough matches remain.
    ``delta_p`` is the floor of the smallest shift over rows [0, image_height).
    """
    matches = np.asarray(matches, dtype=np.float64)
    if matches.ndim != 2 or matches.shape[1] != 3:
        raise ValueError("matches must be an (m, 3) array of (u_ref, u_tar, v)")
    if len(matches) < 2:
        raise RankDeficientError("need at least 2 correspondences")
    v = matches[:, 2]
    delta = matches[:, 0] - matches[:, 1]
    k0, k1 = _affine_fit(v, delta)
    resid = np.abs(delta - (k0 + k1 * v))
    keep = resid <= TRIM_RESIDUAL
    if keep.sum() >= 2 and not keep.all():
        try:
            k0, k1 = _affine_fit(v[keep], delta[keep])
        except RankDeficientError:
            pass  # trimmed set collapsed onto one row; keep the initial fit
    ends = np.array([k0, k0 + k1 * (image_height - 1)])
    delta_p = int(math.floor(ends.min()))
    return GroundPlaneShiftModel(kappa0=float(k0), kappa1=float(k1), delta_p=delta_p)


def warp_target(tar, model):
    """Shift each target row right by the model's integer row shift.

    Vacated pixels are set to intensity 0. The shift is integer, so the warp
    is exactly invertible wherever the source column stays in range.
    """
    tar = as_gray(tar)
    h, w = tar.shape
    out = np.zeros_like(tar)
    shifts = model.row_shift(np.arange(h))
    for v in range(h):
        s = int(shifts[v])
        if s >= w or s <= -w:
            continue
        if s >= 0:
            out[v, s:] = tar[v, : w - s]
        else:
            out[v, : w + s] = tar[v, -s:]
    return out
