"""Road disparity modelling and flattening.

The road's disparities are affine in the image row for a roll-free rig:
``d = alpha0 + alpha1 * v``. A non-zero roll angle ``psi`` tilts the rows,
so the fit is performed against the rotated row coordinate

    y(psi) = v * cos(psi) - u * sin(psi)

and the roll angle is recovered by minimising the residual fit energy
``E(psi)`` with gradient descent whose learning rate follows a secant
update. Subtracting the fitted model from every disparity flattens the
road, leaving damage as outliers around the constant ``delta_t``.

Samples are an (m, 3) float64 array with columns (u, v, d). All fit algebra
reduces to accumulated scalar sums, so fits run in O(m) time and O(1)
memory with 64-bit accumulation throughout.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoSamplesError, RankDeficientError
from .raster import INVALID, as_disparity, valid_mask

_CURVATURE_PROBE = 1e-4  # rad; finite-difference step for the gradient scale


@dataclass(frozen=True)
class RoadModelFit:
    """Fitted disparity projection model and roll angle.

    alpha0: disparity intercept (px); alpha1: disparity per rotated row
    (px/px); psi: roll angle in (-pi/2, pi/2]; e_min: residual energy (px^2).
    """

    alpha0: float
    alpha1: float
    psi: float
    e_min: float


@dataclass(frozen=True)
class RollOptions:
    """Settings of the roll-angle search.

    lambda0 is expressed in units of the inverse energy curvature at the
    starting angle: the gradient is divided by a finite-difference estimate
    of d2E/dpsi2 at psi_init, which makes the step size scale-free (raw
    energy units would make a fixed rate meaningless across image sizes).
    psi_init allows warm-starting from the previous frame's estimate.
    """

    lambda0: float = 10.0
    delta_psi: float = np.pi / 1.8e6
    max_iters: int = 100
    psi_init: float = 0.0

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.delta_psi <= 0:
            raise ValueError("delta_psi must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


def collect_samples(disp, mask=None):
    """Gather (u, v, d) rows for every valid pixel, intersected with mask."""
    disp = as_disparity(disp)
    sel = valid_mask(disp)
    if mask is not None:
        if mask.shape != disp.shape:
            raise ValueError("mask and disparity map sizes differ")
        sel = sel & mask.astype(bool)
    vv, uu = np.nonzero(sel)
    if len(vv) == 0:
        raise NoSamplesError("no valid disparity pixels selected")
    return np.column_stack([uu.astype(np.float64), vv.astype(np.float64), disp[sel]])


def _split(samples):
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 3 or len(samples) == 0:
        raise ValueError("samples must be a non-empty (m, 3) array of (u, v, d)")
    return samples[:, 0], samples[:, 1], samples[:, 2]


def _fit_at(u, v, d, psi):
    """Closed-form affine fit of d against y(psi); returns (a0, a1, e_min)."""
    y = v * np.cos(psi) - u * np.sin(psi)
    m = float(len(d))
    sy = y.sum()
    syy = (y * y).sum()
    mean_y = sy / m
    var_y = syy / m - mean_y * mean_y
    if len(d) < 2 or var_y <= 1e-12 * max(1.0, mean_y * mean_y):
        raise RankDeficientError(
            f"samples span fewer than 2 distinct rotated rows at psi={psi:g}"
        )
    sd = d.sum()
    syd = (y * d).sum()
    det = m * syy - sy * sy
    a0 = (syy * sd - sy * syd) / det
    a1 = (m * syd - sy * sd) / det
    # two-pass residual sum: equal to d'd - d'Y(Y'Y)^-1 Y'd but free of the
    # large cancellation that form suffers, which matters for derivative checks
    r = d - a0 - a1 * y
    e_min = float(np.sum(r * r))
    return a0, a1, e_min


def fit_linear_model(samples):
    """Least-squares line of disparity against the image row.

    Returns (alpha, e_min) where alpha = [alpha0, alpha1] and e_min is the
    summed squared residual. Raises RankDeficientError when all samples sit
    on one row.
    """
    u, v, d = _split(samples)
    a0, a1, e_min = _fit_at(u, v, d, 0.0)
    return np.array([a0, a1]), e_min


def rotated_energy(samples, psi):
    """Affine fit of disparity against the rotated row y(psi).

    The rotation transforms sample coordinates only; no raster resampling
    happens. At psi = 0 this reduces exactly to :func:`fit_linear_model`.
    """
    u, v, d = _split(samples)
    a0, a1, e_min = _fit_at(u, v, d, psi)
    return np.array([a0, a1]), e_min


def energy_gradient(samples, psi):
    """Analytical derivative dE/dpsi of the minimal fit energy.

    With r the fit residual and y' = dy/dpsi = -v sin(psi) - u cos(psi),
    the envelope theorem collapses the derivative of the projected energy to
    dE/dpsi = -2 * alpha1 * sum(r * y'), since the fitted coefficients are
    stationary. Everything reduces to scalar sums; no n x n matrices are
    formed.
    """
    u, v, d = _split(samples)
    a0, a1, _ = _fit_at(u, v, d, psi)
    y = v * np.cos(psi) - u * np.sin(psi)
    yp = -v * np.sin(psi) - u * np.cos(psi)
    r = d - a0 - a1 * y
    return float(-2.0 * a1 * np.sum(r * yp))


def wrap_roll_angle(psi):
    """Wrap an angle into (-pi/2, pi/2]; the fit energy has period pi."""
    w = float((psi + np.pi / 2) % np.pi - np.pi / 2)
    if w <= -np.pi / 2:
        w += np.pi
    return w


def estimate_roll(samples, opts=None):
    """Estimate the roll angle by minimising the rotated fit energy.

    Gradient descent with the secant learning-rate update
    ``lam <- lam * g_k / (g_k - g_{k+1})``; iteration stops when the angle
    moves less than delta_psi or max_iters is reached. A vanishing gradient
    difference is treated as converged. The best-energy iterate is returned,
    with psi wrapped into (-pi/2, pi/2] and the model re-fitted there; on
    non-convergence a warning is emitted.
    """
    if opts is None:
        opts = RollOptions()
    u, v, d = _split(samples)

    def eval_at(psi):
        """Energy and raw gradient at psi, sharing one fit."""
        a0, a1, e = _fit_at(u, v, d, psi)
        y = v * np.cos(psi) - u * np.sin(psi)
        yp = -v * np.sin(psi) - u * np.cos(psi)
        r = d - a0 - a1 * y
        return e, float(-2.0 * a1 * np.sum(r * yp))

    psi = float(opts.psi_init)
    # scale-free gradient: divide by the curvature of E at the start
    h = _CURVATURE_PROBE
    curv = abs((eval_at(psi + h)[1] - eval_at(psi - h)[1]) / (2.0 * h))
    if not np.isfinite(curv) or curv < 1e-300:
        curv = 1.0

    e0, g_raw = eval_at(psi)
    best_psi, best_e = psi, e0
    lam = float(opts.lambda0)
    g = g_raw / curv
    converged = False
    for _ in range(opts.max_iters):
        psi_next = psi - lam * g
        try:
            e_next, g_next_raw = eval_at(psi_next)
        except RankDeficientError:
            break
        if e_next < best_e:
            best_psi, best_e = psi_next, e_next
        if abs(psi_next - psi) < opts.delta_psi:
            converged = True
            break
        g_next = g_next_raw / curv
        diff = g - g_next
        if abs(diff) < 1e-15:
            converged = True
            break
        lam = lam * g / diff
        psi, g = psi_next, g_next
    if not converged:
        warnings.warn(
            f"roll search did not converge within {opts.max_iters} iterations; "
            f"returning the best iterate psi={best_psi:.6g}",
            RuntimeWarning,
            stacklevel=2,
        )
    psi_final = wrap_roll_angle(best_psi)
    a0, a1, e_min = _fit_at(u, v, d, psi_final)
    return RoadModelFit(alpha0=float(a0), alpha1=float(a1), psi=psi_final, e_min=e_min)


def fit_road_model(samples, opts=None, trim_3sigma=False):
    """Roll-aware road fit with an optional single 3-sigma trim pass.

    When trim_3sigma is set, samples further than three residual standard
    deviations from the first fit are dropped and the fit repeated once,
    warm-started at the first estimate.
    """
    fit = estimate_roll(samples, opts)
    if trim_3sigma:
        u, v, d = _split(samples)
        y = v * np.cos(fit.psi) - u * np.sin(fit.psi)
        resid = d - fit.alpha0 - fit.alpha1 * y
        sigma = np.sqrt(fit.e_min / len(d))
        keep = np.abs(resid) <= 3.0 * sigma
        if keep.sum() >= 2 and not keep.all():
            base = opts if opts is not None else RollOptions()
            warm = RollOptions(
                lambda0=base.lambda0,
                delta_psi=base.delta_psi,
                max_iters=base.max_iters,
                psi_init=fit.psi,
            )
            try:
                fit = estimate_roll(np.asarray(samples)[keep], warm)
            except RankDeficientError:
                pass  # trimmed set degenerate; keep the untrimmed fit
    return fit


def transform_disparities(disp, fit, delta_t=30.0):
    """Flatten the road: subtract the fitted model from every valid pixel.

    l'(u, v) = l(u, v) - alpha0 + alpha1 * (u sin(psi) - v cos(psi)) + delta_t.
    On-model pixels map to delta_t; damage keeps its offset from the plane.
    INVALID pixels are preserved.
    """
    disp = as_disparity(disp)
    h, w = disp.shape
    uu = np.arange(w, dtype=np.float64)[None, :]
    vv = np.arange(h, dtype=np.float64)[:, None]
    correction = fit.alpha1 * (uu * np.sin(fit.psi) - vv * np.cos(fit.psi))
    out = disp - fit.alpha0 + correction + delta_t
    out[~valid_mask(disp)] = INVALID
    return out
