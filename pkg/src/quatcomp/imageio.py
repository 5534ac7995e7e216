"""Bit-exact PPM/PGM codecs and the image <-> quaternion matrix bridge.

Binary PPM (P6, maxval 255) is the canonical format: magic, whitespace
separated width/height/maxval, one whitespace byte, then row-major RGB
triples.  PGM (P5) carries masks: byte 255 marks an observed pixel, 0 a
missing one.  PNG support is an optional adapter over Pillow.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import DomainError, ShapeMismatchError
from .quat import QMatrix


def _read_token(stream: io.BufferedIOBase) -> bytes:
    """Next whitespace-delimited token, skipping '#' comments."""
    token = b""
    while True:
        ch = stream.read(1)
        if ch == b"":
            if token:
                return token
            raise DomainError("unexpected end of header")
        if ch == b"#":
            while ch not in (b"\n", b"\r", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _read_netpbm(stream, magic: bytes, channels: int) -> np.ndarray:
    got = stream.read(2)
    if got != magic:
        raise DomainError(f"bad magic {got!r}, expected {magic!r}")
    width = int(_read_token(stream))
    height = int(_read_token(stream))
    maxval = int(_read_token(stream))
    if maxval != 255:
        raise DomainError(f"only maxval 255 is supported, got {maxval}")
    # header ends after exactly one whitespace byte, already consumed by
    # the token reader
    count = width * height * channels
    data = stream.read(count)
    if len(data) != count:
        raise DomainError(f"truncated pixel data: expected {count} bytes, "
                          f"got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, channels)


def read_ppm(path) -> np.ndarray:
    """Load a binary PPM as a (height, width, 3) uint8 array."""
    with open(path, "rb") as fh:
        return _read_netpbm(fh, b"P6", 3)


def write_ppm(path, pixels: np.ndarray) -> None:
    """Write a (height, width, 3) uint8 array as canonical binary PPM."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.dtype != np.uint8:
        raise DomainError(f"need (h, w, 3) uint8 pixels, got shape "
                          f"{pixels.shape} dtype {pixels.dtype}")
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Load a binary PGM as a (height, width) uint8 array."""
    with open(path, "rb") as fh:
        return _read_netpbm(fh, b"P5", 1)


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise DomainError(f"need (h, w) uint8 values, got shape "
                          f"{gray.shape} dtype {gray.dtype}")
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(gray.tobytes())


def read_image(path) -> np.ndarray:
    """Load PPM directly or other formats through the Pillow adapter."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".ppm":
        return read_ppm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise DomainError(
            f"reading {ext or 'unknown'} files requires Pillow; install "
            f"the 'png' extra or convert to PPM") from exc
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def image_to_qmatrix(pixels: np.ndarray) -> QMatrix:
    """RGB pixels to a pixel quaternion matrix (R, G, B on i, j, k)."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ShapeMismatchError(f"need (h, w, 3) pixels, got {pixels.shape}")
    p = pixels.astype(np.float64)
    return QMatrix.from_pure(p[..., 0], p[..., 1], p[..., 2])


def qmatrix_to_image(theta: QMatrix) -> np.ndarray:
    """Quaternion matrix back to uint8 RGB: clamp to [0, 255], then
    round half to even."""
    stacked = np.stack([theta.c1, theta.c2, theta.c3], axis=-1)
    clamped = np.clip(stacked, 0.0, 255.0)
    return np.rint(clamped).astype(np.uint8)


def mask_from_pgm(gray: np.ndarray) -> np.ndarray:
    """Boolean observed-mask from a PGM: 255 observed, 0 missing."""
    return np.asarray(gray) >= 128


def mask_to_pgm(mask: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(mask), np.uint8(255), np.uint8(0))
