"""Bit-exact file I/O for images and disparity maps.

Supported formats:

* PGM (binary ``P5``), 8-bit only, for gray images. Comments (``#``) in the
  header are honoured; maxval above 255 is rejected.
* PNG, 8-bit grayscale for images and 16-bit single-channel for disparity
  maps. Disparity PNGs follow the KITTI convention: the stored integer is
  ``round(256 * disparity)`` and 0 marks a pixel without an estimate.
* PFM, single channel (header ``Pf``), 32-bit little-endian floats, rows
  stored bottom-to-top, scale line ``-1.0``. INVALID pixels are written as
  negative infinity. This is the lossless interchange format.
* CSV, write-only: one text row per raster row, ``inv`` for INVALID.
"""

import numpy as np
from PIL import Image

from .errors import (
    DisparityOverflowError,
    FormatError,
    TruncatedPayloadError,
    UnsupportedDepthError,
)
from .raster import INVALID, as_disparity, as_gray, valid_mask

_PNG16_MODES = ("I;16", "I;16B", "I;16L", "I")


def _read_pgm_token(f):
    # One whitespace-delimited header token, skipping '#' comments.
    tok = b""
    while True:
        ch = f.read(1)
        if ch == b"":
            raise TruncatedPayloadError("unexpected end of PGM header")
        if ch == b"#":
            while ch not in (b"\n", b"", b"\r"):
                ch = f.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def load_pgm(path):
    """Read a binary 8-bit PGM (P5) file into a gray image."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic != b"P5":
            raise FormatError(f"{path}: not a binary PGM (magic {magic!r})")
        width = int(_read_pgm_token(f))
        height = int(_read_pgm_token(f))
        maxval = int(_read_pgm_token(f))
        if width < 1 or height < 1:
            raise FormatError(f"{path}: bad dimensions {width}x{height}")
        if maxval > 255:
            raise UnsupportedDepthError(
                f"{path}: maxval {maxval} needs more than 8 bits"
            )
        if maxval < 1:
            raise FormatError(f"{path}: bad maxval {maxval}")
        payload = f.read(width * height)
        if len(payload) != width * height:
            raise TruncatedPayloadError(
                f"{path}: expected {width * height} pixel bytes, got {len(payload)}"
            )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(img, path):
    """Write a gray image as binary 8-bit PGM (P5)."""
    img = as_gray(img)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def load_gray_image(path):
    """Read an 8-bit gray image from a PGM (P5) or grayscale PNG file.

    Intensities are returned exactly as stored: no gamma, no rescale.
    """
    path = str(path)
    if path.lower().endswith(".pgm"):
        return load_pgm(path)
    with Image.open(path) as im:
        if im.mode in _PNG16_MODES:
            raise UnsupportedDepthError(f"{path}: 16-bit image, expected 8-bit gray")
        if im.mode != "L":
            raise UnsupportedDepthError(
                f"{path}: mode {im.mode!r}, expected single-channel 8-bit gray"
            )
        return np.asarray(im, dtype=np.uint8).copy()


def save_gray_image(img, path):
    """Write a gray image as PGM or 8-bit grayscale PNG, chosen by extension."""
    img = as_gray(img)
    path = str(path)
    if path.lower().endswith(".pgm"):
        save_pgm(img, path)
    else:
        Image.fromarray(img, mode="L").save(path)


def load_disparity_png16(path):
    """Read a 16-bit disparity PNG; stored value s maps to s/256, 0 to INVALID."""
    with Image.open(str(path)) as im:
        if im.mode == "L":
            raise UnsupportedDepthError(f"{path}: 8-bit PNG, expected 16-bit")
        if im.mode not in _PNG16_MODES:
            raise UnsupportedDepthError(
                f"{path}: mode {im.mode!r}, expected single-channel 16-bit"
            )
        raw = np.asarray(im).astype(np.int64)
    if raw.size and (raw.min() < 0 or raw.max() > 65535):
        raise UnsupportedDepthError(f"{path}: sample values exceed 16 bits")
    disp = raw.astype(np.float64) / 256.0
    disp[raw == 0] = INVALID
    return disp


def save_disparity_png16(disp, path):
    """Write a disparity map as 16-bit PNG using the 1/256-quantized convention.

    Valid pixels whose quantized value would collide with the 0 sentinel are
    stored as 1 (error at most 1/256) so INVALID survives every round trip.
    """
    disp = as_disparity(disp)
    valid = valid_mask(disp)
    q = np.zeros(disp.shape, dtype=np.int64)
    # floor(x + 0.5): round half up, matching the rest of the package
    q[valid] = np.floor(disp[valid] * 256.0 + 0.5).astype(np.int64)
    if np.any(q > 65535):
        raise DisparityOverflowError(
            f"disparity {disp[q > 65535].max():g} does not fit 16-bit PNG "
            "(limit is 255.998)"
        )
    q[valid & (q == 0)] = 1
    Image.fromarray(q.astype(np.uint16)).save(str(path))


def load_disparity_pfm(path):
    """Read a single-channel PFM disparity map; non-finite or negative -> INVALID."""
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic == b"PF":
            raise UnsupportedDepthError(f"{path}: 3-channel PFM, expected 'Pf'")
        if magic != b"Pf":
            raise FormatError(f"{path}: not a PFM file (magic {magic!r})")
        dims = f.readline().split()
        if len(dims) != 2:
            raise FormatError(f"{path}: malformed PFM dimension line")
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        if scale >= 0:
            raise FormatError(f"{path}: big-endian PFM not supported (scale {scale})")
        payload = f.read(width * height * 4)
        if len(payload) != width * height * 4:
            raise TruncatedPayloadError(f"{path}: truncated PFM payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(height, width)
    data = np.flipud(data).astype(np.float64)  # rows are stored bottom-to-top
    disp = data.copy()
    disp[~np.isfinite(data) | (data < 0)] = INVALID
    return disp


def save_disparity_pfm(disp, path):
    """Write a disparity map as single-channel little-endian PFM (lossless)."""
    disp = as_disparity(disp)
    h, w = disp.shape
    data = disp.astype(np.float32)
    data[~valid_mask(disp)] = np.float32(-np.inf)
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.flipud(data).astype("<f4").tobytes())


def save_disparity_csv(disp, path):
    """Write a disparity map as CSV, one line per raster row, 'inv' for INVALID."""
    disp = as_disparity(disp)
    with open(path, "w", encoding="ascii") as f:
        for row in disp:
            f.write(",".join("inv" if not np.isfinite(x) else repr(float(x)) for x in row))
            f.write("\n")


def save_disparity(disp, path, format):
    """Write a disparity map in one of the supported formats.

    format: 'png16', 'pfm' or 'csv'.
    """
    if format == "png16":
        save_disparity_png16(disp, path)
    elif format == "pfm":
        save_disparity_pfm(disp, path)
    elif format == "csv":
        save_disparity_csv(disp, path)
    else:
        raise ValueError(f"unknown disparity format {format!r}")


def load_disparity(path):
    """Read a disparity map, dispatching on extension (.png -> png16, .pfm)."""
    p = str(path).lower()
    if p.endswith(".pfm"):
        return load_disparity_pfm(path)
    if p.endswith(".png"):
        return load_disparity_png16(path)
    raise FormatError(f"{path}: cannot infer disparity format from extension")
