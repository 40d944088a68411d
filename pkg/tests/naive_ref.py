"""Naive direct-loop reference matcher used as the bit-exactness oracle.

Everything here is written as plain per-pixel Python loops straight from
the published formulas: no integral images, no precomputed statistics, no
weight tables, no vectorization. Expression shapes (operator association,
dtype promotions) follow the formulas exactly as the library states them,
so a correct optimized implementation must reproduce these results
bit-for-bit: all block sums are integer-exact and every float step is a
deterministic IEEE-754 operation.
"""

import numpy as np


def block_mean_std(img, u, v, r):
    n = (2 * r + 1) ** 2
    s = 0
    sq = 0
    for dv in range(-r, r + 1):
        for du in range(-r, r + 1):
            x = int(img[v + dv, u + du])
            s += x
            sq += x * x
    mu = s / n
    var = sq / n - mu * mu
    if var < 0.0:
        var = 0.0
    return mu, float(np.sqrt(var))


def raw_cost_volume(ref, tar, r, d_max):
    """Reference-view raw costs by direct triple loops."""
    h, w = ref.shape
    n = (2 * r + 1) ** 2
    vol = np.full((h, w, d_max + 1), np.nan, dtype=np.float32)
    for v in range(r, h - r):
        for u in range(r, w - r):
            mr, sr = block_mean_std(ref, u, v, r)
            if sr == 0.0:
                continue
            for d in range(0, min(d_max, u - r) + 1):
                ut = u - d
                mt, st = block_mean_std(tar, ut, v, r)
                if st == 0.0:
                    continue
                cross = 0
                for dv in range(-r, r + 1):
                    for du in range(-r, r + 1):
                        cross += int(ref[v + dv, u + du]) * int(tar[v + dv, ut + du])
                denom = sr * st
                c = (denom + mr * mt) / denom - cross / (n * denom)
                vol[v, u, d] = np.float32(c)
    return vol


def raw_cost_volume_target(ref, tar, r, d_max):
    """Target-view raw costs: tar block at u against ref block at u + d."""
    h, w = ref.shape
    n = (2 * r + 1) ** 2
    vol = np.full((h, w, d_max + 1), np.nan, dtype=np.float32)
    for v in range(r, h - r):
        for u in range(r, w - r):
            mt, st = block_mean_std(tar, u, v, r)
            if st == 0.0:
                continue
            for d in range(0, min(d_max, w - 1 - r - u) + 1):
                ur = u + d
                mr, sr = block_mean_std(ref, ur, v, r)
                if sr == 0.0:
                    continue
                cross = 0
                for dv in range(-r, r + 1):
                    for du in range(-r, r + 1):
                        cross += int(tar[v + dv, u + du]) * int(ref[v + dv, ur + du])
                denom = st * sr
                c = (denom + mt * mr) / denom - cross / (n * denom)
                vol[v, u, d] = np.float32(c)
    return vol


def aggregate(raw, guide, radius, sigma0, sigma1):
    """Bilateral-weighted mean over the (2*radius+1)^2 window, centre included.

    Offsets run row-major; weights are evaluated per pair with np.exp, the
    same transcendental the library's tables are built from.
    """
    h, w, nd = raw.shape
    out = np.full((h, w, nd), np.nan, dtype=np.float32)
    for v in range(h):
        for u in range(w):
            for d in range(nd):
                num = 0.0
                den = 0.0
                for dv in range(-radius, radius + 1):
                    qv = v + dv
                    if not 0 <= qv < h:
                        continue
                    for du in range(-radius, radius + 1):
                        qu = u + du
                        if not 0 <= qu < w:
                            continue
                        c = raw[qv, qu, d]
                        if not np.isfinite(c):
                            continue
                        di = abs(int(guide[v, u]) - int(guide[qv, qu]))
                        w0 = np.exp(-(du * du + dv * dv) / (sigma0 * sigma0))
                        w1 = np.exp(-(di * di) / (sigma1 * sigma1))
                        wgt = w0 * w1
                        num += wgt * float(c)
                        den += wgt
                if den > 0.0:
                    out[v, u, d] = np.float32(num / den)
    return out


def wta(vol):
    h, w, nd = vol.shape
    disp = np.full((h, w), np.nan)
    for v in range(h):
        for u in range(w):
            best = np.inf
            best_d = -1
            for d in range(nd):
                c = vol[v, u, d]
                if np.isfinite(c) and c < best:
                    best = c
                    best_d = d
            if best_d >= 0:
                disp[v, u] = float(best_d)
    return disp


def lr_check(disp_ref, disp_tar, delta_r):
    h, w = disp_ref.shape
    out = np.full((h, w), np.nan)
    for v in range(h):
        for u in range(w):
            dr = disp_ref[v, u]
            if not np.isfinite(dr):
                continue
            ut = u - int(dr)
            if not 0 <= ut < w:
                continue
            dt = disp_tar[v, ut]
            if not np.isfinite(dt):
                continue
            if (dr - dt) * (dr - dt) <= delta_r:
                out[v, u] = dr
    return out


def subpixel(disp, vol):
    h, w, nd = vol.shape
    out = disp.copy()
    for v in range(h):
        for u in range(w):
            dr = disp[v, u]
            if not np.isfinite(dr):
                continue
            d = int(dr)
            if d < 1 or d > nd - 2:
                continue
            cm = vol[v, u, d - 1]
            cz = vol[v, u, d]
            cp = vol[v, u, d + 1]
            if not (np.isfinite(cm) and np.isfinite(cz) and np.isfinite(cp)):
                continue
            cm = float(cm)
            cz = float(cz)
            cp = float(cp)
            denom = 2.0 * cm + 2.0 * cp - 4.0 * cz
            if denom > 1e-12:
                out[v, u] = d + (cm - cp) / denom
    return out


def full_match(ref, tar, params):
    """The whole matcher by direct loops; mirrors run_dense_matching."""
    raw_ref = raw_cost_volume(ref, tar, params.window_radius, params.d_max)
    raw_tar = raw_cost_volume_target(ref, tar, params.window_radius, params.d_max)
    vol_ref = aggregate(raw_ref, ref, params.agg_radius, params.sigma0, params.sigma1)
    vol_tar = aggregate(raw_tar, tar, params.agg_radius, params.sigma0, params.sigma1)
    wta_ref = wta(vol_ref)
    wta_tar = wta(vol_tar)
    consistent = lr_check(wta_ref, wta_tar, params.delta_r)
    refined = subpixel(consistent, vol_ref)
    return {
        "raw_ref": raw_ref,
        "raw_tar": raw_tar,
        "vol_ref": vol_ref,
        "vol_tar": vol_tar,
        "wta_ref": wta_ref,
        "wta_tar": wta_tar,
        "consistent": consistent,
        "disparity": refined,
    }
