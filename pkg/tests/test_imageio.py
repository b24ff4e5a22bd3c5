import numpy as np
import pytest

from agenet.data.imageio import decode_pnm, encode_pgm, encode_ppm, read_ppm, write_pgm, write_ppm
from agenet.errors import ImageFormatError


def test_ppm_roundtrip(tmp_path, rng):
    img = rng.integers(0, 256, size=(3, 5, 7)).astype(np.uint8)
    write_ppm(tmp_path / "a.ppm", img)
    assert np.array_equal(read_ppm(tmp_path / "a.ppm"), img)


def test_pgm_roundtrip(rng):
    img = rng.integers(0, 256, size=(4, 6)).astype(np.uint8)
    assert np.array_equal(decode_pnm(encode_pgm(img)), img)


def test_header_layout():
    data = encode_ppm(np.zeros((3, 2, 4), np.uint8))
    assert data.startswith(b"P6\n4 2\n255\n") and len(data) == 11 + 24


def test_float_input_rounded_and_clipped():
    img = np.array([[[-5.0, 0.4, 0.6, 300.0]]] * 3)
    assert read_back(img).tolist() == [0, 0, 1, 255]


def read_back(img):
    return decode_pnm(encode_ppm(img))[0, 0]


def test_comments_in_header():
    data = b"P6\n# made by hand\n2 1 # width height\n255\n" + bytes(range(6))
    assert decode_pnm(data)[:, 0, 1].tolist() == [3, 4, 5]


@pytest.mark.parametrize("data", [
    b"P3\n1 1\n255\n0 0 0\n",
    b"P6\n1 1\n65535\n" + b"\0" * 6,
    b"P6\n2 2\n255\n\0\0\0",
    b"P6\n2",
    b"P6\nx 2\n255\n",
])
def test_rejects(data):
    with pytest.raises(ImageFormatError):
        decode_pnm(data)


def test_grey_ppm_read_as_rgb(tmp_path):
    write_pgm(tmp_path / "g.pgm", np.full((2, 3), 9, np.uint8))
    img = read_ppm(tmp_path / "g.pgm")
    assert img.shape == (3, 2, 3) and (img == 9).all()


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_ppm(tmp_path / "none.ppm")
