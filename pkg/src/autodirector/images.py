"""Minimal binary PGM (P5) and PPM (P6) image reading and writing."""

from __future__ import annotations

import numpy as np

from .errors import FormatError


def _parse_netpbm(data: bytes, magic: bytes, source=None):
    if not data.startswith(magic):
        raise FormatError(
            f"expected {magic.decode()} image, got header {data[:2]!r}", source
        )
    # Header is magic, width, height, maxval as whitespace separated tokens,
    # with '#' comments allowed between them.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated image header", source)
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"non-numeric image header fields {tokens}", source)
    if width <= 0 or height <= 0:
        raise FormatError(f"bad image dimensions {width}x{height}", source)
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported maxval {maxval}, need 1..255", source)
    return width, height, maxval, data[pos:]


def read_pgm(data: bytes, source=None) -> np.ndarray:
    """Decode a binary P5 grayscale image to a uint8 array of shape (h, w)."""
    width, height, _, body = _parse_netpbm(data, b"P5", source)
    need = width * height
    if len(body) < need:
        raise FormatError(f"image body too short: {len(body)} < {need}", source)
    return np.frombuffer(body[:need], dtype=np.uint8).reshape(height, width)


def write_pgm(pixels: np.ndarray) -> bytes:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 2:
        raise ValueError("grayscale image must be 2-dimensional")
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def read_ppm(data: bytes, source=None) -> np.ndarray:
    """Decode a binary P6 color image to a uint8 array of shape (h, w, 3)."""
    width, height, _, body = _parse_netpbm(data, b"P6", source)
    need = width * height * 3
    if len(body) < need:
        raise FormatError(f"image body too short: {len(body)} < {need}", source)
    return np.frombuffer(body[:need], dtype=np.uint8).reshape(height, width, 3)


def write_ppm(pixels: np.ndarray) -> bytes:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("color image must have shape (h, w, 3)")
    h, w, _ = pixels.shape
    return b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_pgm(fh.read(), source=str(path))


def load_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_ppm(fh.read(), source=str(path))


def save_pgm(path, pixels):
    with open(path, "wb") as fh:
        fh.write(write_pgm(pixels))


def save_ppm(path, pixels):
    with open(path, "wb") as fh:
        fh.write(write_ppm(pixels))
