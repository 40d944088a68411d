"""File format round trips and error handling."""

import numpy as np
import pytest
from PIL import Image

from roadstereo import (
    DisparityOverflowError,
    FormatError,
    TruncatedPayloadError,
    UnsupportedDepthError,
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


def test_pgm_round_trip_is_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(23, 31)).astype(np.uint8)
    p = tmp_path / "a.pgm"
    save_pgm(img, p)
    again = load_pgm(p)
    assert np.array_equal(img, again)
    save_pgm(again, tmp_path / "b.pgm")
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_pgm_literal_2x2(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 128, 255, 7]))
    img = load_gray_image(p)
    assert img.shape == (2, 2)
    assert img.tolist() == [[0, 128], [255, 7]]


def test_pgm_header_sizes_and_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5 # comment\n640 360 # dims\n255\n" + bytes(640 * 360))
    img = load_gray_image(p)
    assert img.shape == (360, 640)


def test_pgm_16bit_rejected(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
    with pytest.raises(UnsupportedDepthError):
        load_gray_image(p)


def test_pgm_truncated_payload(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
    with pytest.raises(TruncatedPayloadError):
        load_pgm(p)


def test_missing_file_raises():
    with pytest.raises(FileNotFoundError):
        load_gray_image("/nonexistent/nope.pgm")


def test_png8_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(9, 14)).astype(np.uint8)
    p = tmp_path / "g.png"
    save_gray_image(img, p)
    assert np.array_equal(load_gray_image(p), img)


def test_load_gray_rejects_16bit_and_rgb_png(tmp_path):
    p16 = tmp_path / "d16.png"
    Image.fromarray(np.full((4, 4), 300, dtype=np.uint16)).save(p16)
    with pytest.raises(UnsupportedDepthError):
        load_gray_image(p16)
    prgb = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(prgb)
    with pytest.raises(UnsupportedDepthError):
        load_gray_image(prgb)


def test_png16_stored_value_conventions(tmp_path):
    stored = np.array([[256, 0], [12800, 1]], dtype=np.uint16)
    p = tmp_path / "d.png"
    Image.fromarray(stored).save(p)
    disp = load_disparity_png16(p)
    assert disp[0, 0] == 1.0
    assert np.isnan(disp[0, 1])
    assert disp[1, 0] == 50.0
    assert disp[1, 1] == 1.0 / 256.0


def test_png16_rejects_8bit(tmp_path):
    p = tmp_path / "x.png"
    Image.fromarray(np.zeros((3, 3), dtype=np.uint8), mode="L").save(p)
    with pytest.raises(UnsupportedDepthError):
        load_disparity_png16(p)


def test_png16_round_trip_half_quantum(tmp_path):
    rng = np.random.default_rng(2)
    disp = rng.uniform(1.0 / 256.0, 200.0, size=(17, 13))
    disp[0, 0] = np.nan
    disp[5, 7] = np.nan
    p = tmp_path / "rt.png"
    save_disparity_png16(disp, p)
    back = load_disparity_png16(p)
    valid = np.isfinite(disp)
    assert np.array_equal(valid, np.isfinite(back))
    assert np.max(np.abs(back[valid] - disp[valid])) <= 1.0 / 512.0 + 1e-12


def test_png16_zero_sentinel_and_tiny_values(tmp_path):
    disp = np.array([[np.nan, 0.0005]])
    p = tmp_path / "tiny.png"
    save_disparity_png16(disp, p)
    stored = np.asarray(Image.open(p))
    assert stored[0, 0] == 0  # INVALID stays the sentinel
    assert stored[0, 1] == 1  # valid near-zero bumped off the sentinel
    back = load_disparity_png16(p)
    assert np.isnan(back[0, 0]) and np.isfinite(back[0, 1])


def test_png16_overflow(tmp_path):
    with pytest.raises(DisparityOverflowError):
        save_disparity_png16(np.array([[300.0]]), tmp_path / "o.png")


def test_pfm_round_trip_lossless(tmp_path):
    rng = np.random.default_rng(3)
    disp = rng.uniform(0, 90, size=(11, 8))
    disp[2, 3] = np.nan
    p = tmp_path / "d.pfm"
    save_disparity_pfm(disp, p)
    back = load_disparity_pfm(p)
    valid = np.isfinite(disp)
    assert np.array_equal(valid, np.isfinite(back))
    assert np.array_equal(
        disp[valid].astype(np.float32), back[valid].astype(np.float32)
    )


def test_pfm_layout_bottom_to_top(tmp_path):
    p = tmp_path / "l.pfm"
    disp = np.array([[1.0, 2.0], [3.0, 4.0]])
    save_disparity_pfm(disp, p)
    header, payload = p.read_bytes().split(b"-1.0\n", 1)
    assert header == b"Pf\n2 2\n"
    vals = np.frombuffer(payload, dtype="<f4")
    assert vals.tolist() == [3.0, 4.0, 1.0, 2.0]  # bottom row first


def test_pfm_invalid_written_as_negative_infinity(tmp_path):
    p = tmp_path / "inv.pfm"
    save_disparity_pfm(np.array([[np.nan]]), p)
    payload = p.read_bytes().split(b"-1.0\n", 1)[1]
    assert np.isneginf(np.frombuffer(payload, dtype="<f4"))[0]


def test_pfm_rejects_color_and_big_endian(tmp_path):
    p = tmp_path / "c.pfm"
    p.write_bytes(b"PF\n1 1\n-1.0\n" + bytes(12))
    with pytest.raises(UnsupportedDepthError):
        load_disparity_pfm(p)
    q = tmp_path / "be.pfm"
    q.write_bytes(b"Pf\n1 1\n1.0\n" + bytes(4))
    with pytest.raises(FormatError):
        load_disparity_pfm(q)


def test_pfm_truncated(tmp_path):
    p = tmp_path / "t.pfm"
    p.write_bytes(b"Pf\n3 3\n-1.0\n" + bytes(10))
    with pytest.raises(TruncatedPayloadError):
        load_disparity_pfm(p)


def test_csv_format(tmp_path):
    disp = np.array([[1.5, np.nan], [0.0, 2.25]])
    p = tmp_path / "d.csv"
    save_disparity_csv(disp, p)
    lines = p.read_text().splitlines()
    assert lines == ["1.5,inv", "0.0,2.25"]


def test_save_disparity_dispatch(tmp_path):
    disp = np.array([[1.0, np.nan]])
    for fmt, ext in (("png16", ".png"), ("pfm", ".pfm"), ("csv", ".csv")):
        save_disparity(disp, tmp_path / f"d{ext}", fmt)
    with pytest.raises(ValueError):
        save_disparity(disp, tmp_path / "d.bin", "exr")
    back = load_disparity(tmp_path / "d.pfm")
    assert back[0, 0] == 1.0 and np.isnan(back[0, 1])
