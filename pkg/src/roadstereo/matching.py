"""Dense subpixel disparity estimation.

Stages, in pipeline order:

1. per-pixel block statistics (mean, standard deviation),
2. raw matching cost ``1 - NCC`` per pixel and disparity candidate,
3. edge-preserving cost aggregation with bilateral weights,
4. winner-take-all disparity selection on both views,
5. left-right consistency check (occlusion removal),
6. parabolic subpixel refinement,
7. restoration of the per-row perspective shift.

Cost volumes are float32 arrays shaped (height, width, d_max + 1) with NaN
marking entries that cannot be evaluated (window out of bounds, textureless
block). Every reduction uses a fixed accumulation order, so results are
bit-identical regardless of the worker count used for aggregation.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._sums import block_mean_std, interior_mask, window_sum
from .errors import DegenerateBlockError
from .raster import INVALID, as_disparity, as_gray, check_same_shape, valid_mask


@dataclass(frozen=True)
class MatcherParams:
    """Knobs of the dense matcher.

    window_radius: matching block is (2r+1) x (2r+1).
    d_max: largest disparity candidate searched, inclusive.
    sigma0 / sigma1: spatial and intensity bandwidths of the bilateral
        aggregation weights.
    delta_r: left-right consistency threshold on the squared difference.
    agg_radius: aggregation neighbourhood radius; the default 5 gives the
        11 x 11 window whose 120 off-centre pixels form the neighbourhood.
    """

    window_radius: int = 3
    d_max: int = 30
    sigma0: float = 1.5
    sigma1: float = 5.5
    delta_r: float = 1.0
    agg_radius: int = 5

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if not (self.sigma0 > 0 and self.sigma1 > 0):
            raise ValueError("sigma0 and sigma1 must be positive")
        if self.delta_r <= 0:
            raise ValueError("delta_r must be positive")
        if self.agg_radius < 1:
            raise ValueError("agg_radius must be >= 1")


@dataclass(frozen=True)
class BlockStats:
    """Per-pixel block mean and standard deviation (NaN where undefined)."""

    mu: np.ndarray
    sigma: np.ndarray
    window_radius: int


def block_stats(img, window_radius):
    """Population mean/stddev over the (2r+1)^2 block centred at each pixel.

    Pixels whose block leaves the image are marked NaN.
    """
    img = as_gray(img)
    h, w = img.shape
    if 2 * window_radius + 1 > min(h, w):
        raise ValueError(
            f"{2 * window_radius + 1}px window does not fit a {w}x{h} image"
        )
    mu, sigma = block_mean_std(img, window_radius)
    return BlockStats(mu=mu, sigma=sigma, window_radius=int(window_radius))


def matching_cost(ref, tar, stats_ref, stats_tar, p, d):
    """Matching cost ``1 - NCC`` between the ref block at p=(u, v) and the
    target block at (u - d, v).

    Equals 0 for perfectly correlated blocks and 2 for perfectly
    anti-correlated ones; invariant to intensity offset and gain.
    Raises DegenerateBlockError when either block has zero variance (the
    volume builder marks such entries INVALID instead).
    """
    ref = as_gray(ref)
    tar = as_gray(tar)
    u, v = int(p[0]), int(p[1])
    d = int(d)
    r = stats_ref.window_radius
    if stats_tar.window_radius != r:
        raise ValueError("reference and target stats use different windows")
    h, w = ref.shape
    ut = u - d
    if not (r <= v < h - r and r <= u < w - r and r <= ut <= tar.shape[1] - 1 - r):
        raise ValueError(f"block at p=({u},{v}), d={d} leaves the image")
    mr = stats_ref.mu[v, u]
    sr = stats_ref.sigma[v, u]
    mt = stats_tar.mu[v, ut]
    st = stats_tar.sigma[v, ut]
    if sr == 0.0 or st == 0.0:
        raise DegenerateBlockError("zero-variance block: cost undefined")
    n = (2 * r + 1) ** 2
    block_r = ref[v - r : v + r + 1, u - r : u + r + 1].astype(np.int64)
    block_t = tar[v - r : v + r + 1, ut - r : ut + r + 1].astype(np.int64)
    cross = int((block_r * block_t).sum())
    denom = sr * st
    return float((denom + mr * mt) / denom - cross / (n * denom))


@lru_cache(maxsize=8)
def _spatial_table(radius, sigma0):
    off = np.arange(-radius, radius + 1, dtype=np.int64)
    dist2 = off[:, None] * off[:, None] + off[None, :] * off[None, :]
    return np.exp(-dist2 / (sigma0 * sigma0))


@lru_cache(maxsize=8)
def _range_table(sigma1):
    di = np.arange(256, dtype=np.int64)
    return np.exp(-(di * di) / (sigma1 * sigma1))


def bilateral_weight(ref, p, q, params):
    """Bilateral weight between pixels p and q of the reference image:
    a spatial Gaussian in their distance times a range Gaussian in their
    intensity difference. Both factors come from tables precomputed once
    per (radius, bandwidth): one over all integer offsets of the
    neighbourhood, one over the 256 possible absolute intensity gaps.
    """
    ref = as_gray(ref)
    pu, pv = int(p[0]), int(p[1])
    qu, qv = int(q[0]), int(q[1])
    du, dv = qu - pu, qv - pv
    di = abs(int(ref[pv, pu]) - int(ref[qv, qu]))
    r = max(abs(du), abs(dv), params.agg_radius)
    w0 = _spatial_table(r, params.sigma0)[dv + r, du + r]
    w1 = _range_table(params.sigma1)[di]
    return float(w0 * w1)


def _raw_cost_volume(ref, tar, params):
    """float32 (h, w, d_max+1) volume of raw costs, NaN where undefined."""
    h, w = ref.shape
    r = params.window_radius
    n = (2 * r + 1) ** 2
    mu_r, sg_r = block_mean_std(ref, r)
    mu_t, sg_t = block_mean_std(tar, r)
    inside = interior_mask(ref.shape, r)
    ok_r = inside & (sg_r > 0.0)
    ok_t = inside & (sg_t > 0.0)
    ref64 = ref.astype(np.int64)
    tar64 = tar.astype(np.int64)
    vol = np.full((h, w, params.d_max + 1), np.nan, dtype=np.float32)
    for d in range(params.d_max + 1):
        if d >= w - 2 * r:
            break
        prod = np.zeros((h, w), dtype=np.int64)
        prod[:, d:] = ref64[:, d:] * tar64[:, : w - d]
        cross = window_sum(prod, r)
        valid = ok_r.copy()
        valid[:, : d + r] = False  # target window at u - d must fit
        valid[:, d:] &= ok_t[:, : w - d]
        mu_ts = np.zeros((h, w))
        sg_ts = np.ones((h, w))
        mu_ts[:, d:] = mu_t[:, : w - d]
        sg_ts[:, d:] = sg_t[:, : w - d]
        denom = sg_r * sg_ts
        with np.errstate(invalid="ignore", divide="ignore"):
            c = (denom + mu_r * mu_ts) / denom - cross / (n * denom)
        plane = vol[:, :, d]
        plane[valid] = c[valid].astype(np.float32)
    return vol


def _aggregate_block(raw, guide, params):
    """Aggregate one stripe; row-major offset order fixes the float result."""
    h, w, nd = raw.shape
    radius = params.agg_radius
    w0 = _spatial_table(radius, params.sigma0)
    w1 = _range_table(params.sigma1)
    finite = np.isfinite(raw)
    cost64 = np.where(finite, raw, 0.0).astype(np.float64)
    valid64 = finite.astype(np.float64)
    guide64 = guide.astype(np.int64)
    num = np.zeros((h, w, nd), dtype=np.float64)
    den = np.zeros((h, w, nd), dtype=np.float64)
    for dv in range(-radius, radius + 1):
        y0d, y1d = max(0, -dv), h - max(0, dv)
        if y0d >= y1d:
            continue
        for du in range(-radius, radius + 1):
            x0d, x1d = max(0, -du), w - max(0, du)
            if x0d >= x1d:
                continue
            y0s, y1s = y0d + dv, y1d + dv
            x0s, x1s = x0d + du, x1d + du
            di = np.abs(guide64[y0d:y1d, x0d:x1d] - guide64[y0s:y1s, x0s:x1s])
            wgt = (w0[dv + radius, du + radius] * w1[di])[:, :, None]
            num[y0d:y1d, x0d:x1d, :] += wgt * cost64[y0s:y1s, x0s:x1s, :]
            den[y0d:y1d, x0d:x1d, :] += wgt * valid64[y0s:y1s, x0s:x1s, :]
    out = np.full((h, w, nd), np.nan, dtype=np.float32)
    nz = den > 0.0
    out[nz] = (num[nz] / den[nz]).astype(np.float32)
    return out


def aggregate_costs(raw, guide, params, workers=1):
    """Bilateral-weighted mean of each cost over its aggregation window.

    The window is the (2*agg_radius+1)^2 square centred on the pixel, the
    pixel itself included; neighbours with INVALID raw cost contribute to
    neither the weighted sum nor the normalizer. A pixel whose whole window
    is INVALID stays INVALID.

    workers > 1 splits the image into horizontal bands computed
    concurrently; each band is padded by the window radius, so the output
    is bit-identical for any worker count.
    """
    guide = as_gray(guide)
    if raw.shape[:2] != guide.shape:
        raise ValueError("cost volume and guide image sizes differ")
    h = raw.shape[0]
    radius = params.agg_radius
    workers = max(1, int(workers))
    if workers == 1 or h < 2 * workers:
        return _aggregate_block(raw, guide, params)

    bounds = np.linspace(0, h, workers + 1, dtype=int)

    def run(i):
        b0, b1 = int(bounds[i]), int(bounds[i + 1])
        lo = max(0, b0 - radius)
        hi = min(h, b1 + radius)
        block = _aggregate_block(raw[lo:hi], guide[lo:hi], params)
        return block[b0 - lo : b1 - lo]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, range(workers)))
    return np.concatenate(parts, axis=0)


def compute_cost_volumes(ref, tar_warped, params, workers=1):
    """Aggregated cost volumes for both views.

    The reference volume matches the ref block at (u, v) against the target
    block at (u - d, v); the target volume matches the target block at
    (u, v) against the ref block at (u + d, v). Each volume is aggregated
    with its own image as the bilateral guide.
    """
    ref = as_gray(ref)
    tar_warped = as_gray(tar_warped)
    check_same_shape(ref, tar_warped, "reference and target images")
    raw_ref = _raw_cost_volume(ref, tar_warped, params)
    # cost symmetry: matching tar at u against ref at u+d evaluates the same
    # block pair (products commute), so the raw target volume is a shift
    raw_tar = np.full_like(raw_ref, np.nan)
    w = ref.shape[1]
    for d in range(params.d_max + 1):
        if d < w:
            raw_tar[:, : w - d, d] = raw_ref[:, d:, d]
    vol_ref = aggregate_costs(raw_ref, ref, params, workers)
    vol_tar = aggregate_costs(raw_tar, tar_warped, params, workers)
    return vol_ref, vol_tar


def wta_disparity(vol):
    """Winner-take-all: per pixel, the candidate with the lowest cost.

    Ties break toward the smaller disparity; all-INVALID pixels stay INVALID.
    """
    work = np.where(np.isfinite(vol), vol, np.inf)
    disp = np.argmin(work, axis=2).astype(np.float64)
    disp[~np.isfinite(vol).any(axis=2)] = INVALID
    return disp


def lr_consistency(disp_ref, disp_tar, delta_r):
    """Remove pixels failing the left-right check.

    Pixel p with integer disparity d survives only when the target map at
    (u - d, v) is valid and the squared disparity difference is within
    delta_r; lookups falling outside the image are removed.
    """
    disp_ref = as_disparity(disp_ref)
    disp_tar = as_disparity(disp_tar)
    check_same_shape(disp_ref, disp_tar, "disparity maps")
    h, w = disp_ref.shape
    ok = valid_mask(disp_ref)
    d = np.where(ok, disp_ref, 0.0)
    usrc = np.arange(w)[None, :] - d.astype(np.int64)
    inb = ok & (usrc >= 0) & (usrc < w)
    dt = np.full((h, w), np.nan)
    vv = np.nonzero(inb)
    dt[vv] = disp_tar[vv[0], usrc[vv]]
    with np.errstate(invalid="ignore"):
        keep = inb & np.isfinite(dt) & ((d - dt) * (d - dt) <= delta_r)
    out = disp_ref.copy()
    out[~keep] = INVALID
    return out


def subpixel_refine(disp, vol):
    """Parabolic refinement of integer disparities against their cost curve.

    The vertex of the parabola through the costs at d-1, d, d+1 shifts the
    estimate by at most half a pixel. Applied only where both neighbours
    exist, all three costs are valid and the curvature term exceeds 1e-12;
    otherwise the integer value is kept.
    """
    disp = as_disparity(disp)
    if vol.shape[:2] != disp.shape:
        raise ValueError("volume and disparity sizes differ")
    d_max = vol.shape[2] - 1
    ok = valid_mask(disp)
    d = np.where(ok, disp, 0.0).astype(np.int64)
    inner = ok & (d >= 1) & (d <= d_max - 1)
    iv, iu = np.nonzero(inner)
    dd = d[iv, iu]
    cm = vol[iv, iu, dd - 1].astype(np.float64)
    cz = vol[iv, iu, dd].astype(np.float64)
    cp = vol[iv, iu, dd + 1].astype(np.float64)
    denom = 2.0 * cm + 2.0 * cp - 4.0 * cz
    use = np.isfinite(cm) & np.isfinite(cz) & np.isfinite(cp) & (denom > 1e-12)
    out = disp.copy()
    out[iv[use], iu[use]] = dd[use] + (cm[use] - cp[use]) / denom[use]
    return out


def undo_perspective_shift(disp, model):
    """Add back the integer per-row shift applied before matching."""
    disp = as_disparity(disp)
    h = disp.shape[0]
    shifts = model.row_shift(np.arange(h)).astype(np.float64)
    out = disp + shifts[:, None]  # NaN + shift stays NaN
    return out


@dataclass
class MatchResult:
    """All intermediate products of one dense-matching run."""

    vol_ref: np.ndarray
    vol_tar: np.ndarray
    wta_ref: np.ndarray
    wta_tar: np.ndarray
    consistent: np.ndarray
    disparity: np.ndarray = None


def run_dense_matching(ref, tar_warped, params, workers=1):
    """Full matcher on an already-warped pair; returns residual disparities."""
    vol_ref, vol_tar = compute_cost_volumes(ref, tar_warped, params, workers)
    wta_ref = wta_disparity(vol_ref)
    wta_tar = wta_disparity(vol_tar)
    consistent = lr_consistency(wta_ref, wta_tar, params.delta_r)
    refined = subpixel_refine(consistent, vol_ref)
    return MatchResult(
        vol_ref=vol_ref,
        vol_tar=vol_tar,
        wta_ref=wta_ref,
        wta_tar=wta_tar,
        consistent=consistent,
        disparity=refined,
    )
