"""Deterministic synthetic road scenes with exact ground-truth disparity.

A textured plane is viewed by a rectified stereo rig with known focal
length, baseline, pitch and roll. Its disparity is affine in the rotated
row coordinate:

    d(u, v) = alpha0 + alpha1 * (v cos(psi) - u sin(psi))
    alpha0  = (t_c * n_x / beta) * (f sin(theta) - v_o cos(theta))
    alpha1  = (t_c * n_x / beta) * cos(theta)

Circular defects add a disparity offset inside their disk (negative for
potholes below the plane). The reference image is procedural two-octave
value noise; the target image is the reference warped horizontally through
the exact ground-truth disparity field with linear resampling along rows.

All randomness comes from a 64-bit linear congruential scramble with the
constants MULT = 6364136223846793005 and INC = 1442695040888963407:
each lattice point hashes its coordinates and the seed through two LCG
steps and keeps the top 24 bits. Evaluation order is fixed, so one spec
always renders byte-identical images on any platform.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadSceneError
from .raster import as_gray

_MULT = np.uint64(6364136223846793005)
_INC = np.uint64(1442695040888963407)
_ROW_SALT = np.uint64(0x9E3779B97F4A7C15)
_COL_SALT = np.uint64(0xC2B2AE3D27D4EB4F)

_OCTAVES = ((5, 1, 2.0 / 3.0), (2, 2, 1.0 / 3.0))  # (lattice spacing, salt, amplitude)


@dataclass(frozen=True)
class Defect:
    """Disk-shaped road damage: a disparity offset inside the disk.

    depth_offset < 0 models a pothole below the plane (farther away),
    depth_offset > 0 a bump above it.
    """

    center: tuple  # (u, v) in reference-image pixels
    radius: float
    depth_offset: float

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("defect radius must be >= 1 px")


@dataclass(frozen=True)
class SceneSpec:
    """Full description of a synthetic stereo scene.

    Lengths are in meters, angles in radians, image quantities in pixels.
    theta is the pitch of the optical axis (pi/2 = parallel to the plane),
    psi the roll of the baseline. n_x scales the plane normal component
    that couples into the row shift; only the ratio t_c * n_x / beta
    matters for disparities.
    """

    width: int = 320
    height: int = 240
    f: float = 350.0
    u_o: float = None
    v_o: float = None
    t_c: float = 0.2
    beta: float = 1.6
    theta: float = 1.5568
    psi: float = 0.0
    n_x: float = 0.32
    texture_seed: int = 1
    noise_sigma: float = 0.0
    defects: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.u_o is None:
            object.__setattr__(self, "u_o", self.width / 2.0)
        if self.v_o is None:
            object.__setattr__(self, "v_o", self.height / 2.0)
        object.__setattr__(self, "defects", tuple(self.defects))
        if self.width < 1 or self.height < 1:
            raise ValueError("image must be at least 1x1")
        if self.f <= 0 or self.t_c <= 0 or self.beta <= 0:
            raise ValueError("f, t_c and beta must be positive")
        if not (0.0 < self.theta < np.pi):
            raise ValueError("theta must lie in (0, pi)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def plane_coefficients(self):
        """(alpha0, alpha1) of the affine disparity model of the plane."""
        k = self.t_c * self.n_x / self.beta
        alpha0 = k * (self.f * np.sin(self.theta) - self.v_o * np.cos(self.theta))
        alpha1 = k * np.cos(self.theta)
        return float(alpha0), float(alpha1)


_MASK64 = (1 << 64) - 1


def _hash_u64(i, j, seed, salt):
    """Two LCG steps over mixed lattice coordinates; full uint64 wraparound."""
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    base = ((seed & _MASK64) * int(_MULT) + int(_INC) + salt) & _MASK64
    h = (np.uint64(base) ^ (i * _ROW_SALT)) * _MULT + _INC
    h = (h ^ (j * _COL_SALT)) * _MULT + _INC
    h ^= h >> np.uint64(33)
    return h


def _hash_unit(i, j, seed, salt):
    """Uniform values in [0, 1) from the top 24 bits of the hash."""
    return (_hash_u64(i, j, seed, salt) >> np.uint64(40)).astype(np.float64) * 2.0**-24


def _value_noise(width, height, spacing, seed, salt):
    """Smoothstep-faded bilinear lattice noise, one octave, in [0, 1)."""
    gi = np.arange(height) // spacing
    gj = np.arange(width) // spacing
    ty = ((np.arange(height) % spacing) / spacing)[:, None]
    tx = ((np.arange(width) % spacing) / spacing)[None, :]
    ty = ty * ty * (3.0 - 2.0 * ty)
    tx = tx * tx * (3.0 - 2.0 * tx)
    ii, jj = np.meshgrid(gi, gj, indexing="ij")
    c00 = _hash_unit(ii, jj, seed, salt)
    c01 = _hash_unit(ii, jj + 1, seed, salt)
    c10 = _hash_unit(ii + 1, jj, seed, salt)
    c11 = _hash_unit(ii + 1, jj + 1, seed, salt)
    top = c00 * (1.0 - tx) + c01 * tx
    bot = c10 * (1.0 - tx) + c11 * tx
    return top * (1.0 - ty) + bot * ty


def _texture(spec):
    """Reference-image texture: two octaves of value noise, 8-bit.

    The least significant bit is forced to the pixel's parity, so every
    block of 2x2 or larger has non-zero variance by construction.
    """
    t = np.zeros((spec.height, spec.width))
    for spacing, salt, amplitude in _OCTAVES:
        t += amplitude * _value_noise(
            spec.width, spec.height, spacing, spec.texture_seed, salt
        )
    q = np.clip(np.floor(t * 256.0), 0, 255).astype(np.uint8)
    parity = ((np.arange(spec.height)[:, None] + np.arange(spec.width)[None, :]) & 1)
    return ((q & 0xFE) | parity.astype(np.uint8)).astype(np.uint8)


def _defect_offsets(spec, uu, vv):
    off = np.zeros_like(uu, dtype=np.float64)
    for dft in spec.defects:
        cu, cv = float(dft.center[0]), float(dft.center[1])
        inside = (uu - cu) ** 2 + (vv - cv) ** 2 <= dft.radius * dft.radius
        off = np.where(inside, off + dft.depth_offset, off)
    return off


def _disparity_at(spec, uu, vv):
    """Ground-truth disparity evaluated at (possibly fractional) coords."""
    alpha0, alpha1 = spec.plane_coefficients()
    d = alpha0 + alpha1 * (vv * np.cos(spec.psi) - uu * np.sin(spec.psi))
    return d + _defect_offsets(spec, uu, vv)


def ground_truth_disparity(spec):
    """Exact per-pixel disparity of the scene in the reference view.

    Raises BadSceneError when any pixel's disparity would be negative,
    which also catches scenes whose image crosses the horizon.
    """
    uu, vv = np.meshgrid(
        np.arange(spec.width, dtype=np.float64),
        np.arange(spec.height, dtype=np.float64),
    )
    d = _disparity_at(spec, uu, vv)
    if d.min() < 0.0:
        raise BadSceneError(
            f"scene produces negative disparities (min {d.min():.3f} px)"
        )
    return d


def covisibility_mask(spec, margin=0):
    """Road pixels whose corresponding target point lies inside the image.

    Reference pixels with ``u - d(u, v) < margin`` have no counterpart in
    the target view (they left the frame), so no matcher can recover them;
    evaluation masks normally exclude them.
    """
    gt = ground_truth_disparity(spec)
    uu = np.arange(spec.width, dtype=np.float64)[None, :]
    return (uu - gt) >= float(margin)


def _gaussian_noise(shape, seed, salt, sigma):
    """Box-Muller normals from the lattice hash, fixed evaluation order."""
    h, w = shape
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    u1 = (_hash_u64(ii, jj, seed, salt) >> np.uint64(40)).astype(np.float64)
    u2 = (_hash_u64(ii, jj, seed, salt + 101) >> np.uint64(40)).astype(np.float64)
    u1 = (u1 + 0.5) * 2.0**-24  # strictly inside (0, 1)
    u2 = (u2 + 0.5) * 2.0**-24
    return sigma * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _quantize(img_f):
    return np.clip(np.floor(img_f + 0.5), 0, 255).astype(np.uint8)


def render_stereo_pair(spec):
    """Render (reference, target) images consistent with the ground truth.

    For each target pixel the reference source column solves
    ``u - d(u, v) = u_target``; the plane part has a closed form and defect
    offsets are folded in by fixed-point iteration. The reference row is
    then resampled linearly at the fractional source column
    (out-of-range samples become 0). Identical specs render identical bytes.
    """
    gt = ground_truth_disparity(spec)  # validates the scene
    ref = _texture(spec)
    h, w = ref.shape
    alpha0, alpha1 = spec.plane_coefficients()

    ut, vt = np.meshgrid(
        np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64)
    )
    # plane-only inverse mapping, exact
    denom = 1.0 + alpha1 * np.sin(spec.psi)
    usrc = (ut + alpha0 + alpha1 * vt * np.cos(spec.psi)) / denom
    if spec.defects:
        for _ in range(30):
            nxt = ut + _disparity_at(spec, usrc, vt)
            if np.max(np.abs(nxt - usrc)) < 1e-10:
                usrc = nxt
                break
            usrc = nxt

    inside = (usrc >= 0.0) & (usrc <= w - 1)
    ui = np.clip(np.floor(usrc), 0, w - 2).astype(np.int64)
    frac = usrc - ui
    rows = vt.astype(np.int64)
    reff = ref.astype(np.float64)
    sampled = (1.0 - frac) * reff[rows, ui] + frac * reff[rows, np.minimum(ui + 1, w - 1)]
    tar_f = np.where(inside, sampled, 0.0)

    if spec.noise_sigma > 0:
        ref_f = reff + _gaussian_noise((h, w), spec.texture_seed, 7, spec.noise_sigma)
        tar_f = tar_f + _gaussian_noise((h, w), spec.texture_seed, 8, spec.noise_sigma)
        ref = _quantize(ref_f)
    tar = _quantize(tar_f)
    return as_gray(ref), as_gray(tar)
