"""Disparity accuracy and throughput metrics.

Pixels invalid in either map are excluded from every count: sparse ground
truth simply shrinks the evaluated population m. All reductions are plain
fixed-order numpy sums, safe to call concurrently.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import NoSamplesError
from .raster import as_disparity, check_same_shape, valid_mask


def _joint_selection(est, gt, mask):
    est = as_disparity(est)
    gt = as_disparity(gt)
    check_same_shape(est, gt, "estimated and ground-truth maps")
    sel = valid_mask(est) & valid_mask(gt)
    if mask is not None:
        if mask.shape != est.shape:
            raise ValueError("mask size differs from the disparity maps")
        sel &= mask.astype(bool)
    if not sel.any():
        raise NoSamplesError("no jointly-valid pixels to evaluate")
    return est[sel], gt[sel]


def error_percentage(est, gt, mask=None, epsilon_d=2.0):
    """Percentage of evaluated pixels whose absolute error exceeds epsilon_d.

    The comparison is strict: an error exactly equal to the tolerance counts
    as correct.
    """
    e, g = _joint_selection(est, gt, mask)
    return float(100.0 * np.mean(np.abs(e - g) > epsilon_d))


def rmse(est, gt, mask=None):
    """Root mean squared disparity error over jointly-valid (masked) pixels."""
    e, g = _joint_selection(est, gt, mask)
    return float(np.sqrt(np.mean((e - g) ** 2)))


def mde_per_second(width, height, d_max, t):
    """Millions of disparity evaluations per second:
    ``width * height * d_max * 1e-6 / t``."""
    if t <= 0:
        raise ValueError("processing time must be positive")
    return float(width * height * d_max * 1e-6 / t)


def transformed_stddev(disp_t, mask=None):
    """Population standard deviation of valid (masked) transformed disparities.

    Lower values mean a flatter road after the model subtraction.
    """
    disp_t = np.asarray(disp_t, dtype=np.float64)
    sel = np.isfinite(disp_t)
    if mask is not None:
        if mask.shape != disp_t.shape:
            raise ValueError("mask size differs from the disparity map")
        sel &= mask.astype(bool)
    if not sel.any():
        raise NoSamplesError("no valid pixels selected")
    s = disp_t[sel]
    return float(np.sqrt(np.mean((s - s.mean()) ** 2)))


def _fmt(x):
    return format(float(x), ".6g")


@dataclass(frozen=True)
class EvalReport:
    """Evaluation summary; sigma_d and mde_per_s are filled when available."""

    e_p: float
    e_r: float
    m: int
    epsilon_d: float
    sigma_d: float = None
    mde_per_s: float = None

    def as_dict(self):
        out = {
            "e_p": float(self.e_p),
            "e_r": float(self.e_r),
            "m": int(self.m),
            "epsilon_d": float(self.epsilon_d),
        }
        if self.sigma_d is not None:
            out["sigma_d"] = float(self.sigma_d)
        if self.mde_per_s is not None:
            out["mde_per_s"] = float(self.mde_per_s)
        return out

    def to_json(self):
        return json.dumps(self.as_dict())

    def to_kv_text(self):
        """Flat ``key = value`` block, 6 significant digits."""
        lines = []
        for key, value in self.as_dict().items():
            lines.append(f"{key} = {value if key == 'm' else _fmt(value)}")
        return "\n".join(lines)


def evaluate(est, gt, mask=None, epsilon_d=2.0, sigma_d=None, mde_per_s=None):
    """Convenience wrapper building a full EvalReport from two maps."""
    e, g = _joint_selection(est, gt, mask)
    return EvalReport(
        e_p=float(100.0 * np.mean(np.abs(e - g) > epsilon_d)),
        e_r=float(np.sqrt(np.mean((e - g) ** 2))),
        m=int(e.size),
        epsilon_d=float(epsilon_d),
        sigma_d=sigma_d,
        mde_per_s=mde_per_s,
    )
