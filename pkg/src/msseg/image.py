"""Grid types, grayscale file I/O, normalization and 2-D convolution.

Images are ``float64`` arrays of shape ``(height, width)``; masks are ``bool``
arrays of the same shape. Kernels are square ``float64`` arrays with odd side.
"""

from __future__ import annotations

import io
import os
from typing import Literal

import numpy as np
from PIL import Image

from .errors import (
    DimensionMismatchError,
    ImageFormatError,
    PayloadSizeError,
    UnsupportedFormatError,
)

BorderPolicy = Literal["replicate", "reflect", "zero"]

_PAD_MODES = {"replicate": "edge", "reflect": "symmetric", "zero": "constant"}
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def as_image(data) -> np.ndarray:
    """Validate and convert ``data`` to a finite 2-D float64 image."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be a non-empty 2-D grid, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains NaN or Inf")
    return img


def as_mask(data) -> np.ndarray:
    """Validate and convert ``data`` to a 2-D boolean mask.

    Only the values 0 and 1 (or ``False``/``True``) are accepted.
    """
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be exactly 0 or 1")
        arr = arr != 0
    return arr


def as_kernel(data) -> np.ndarray:
    k = np.asarray(data, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
        raise ValueError(f"kernel must be square with odd side, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ValueError("kernel contains NaN or Inf")
    return k


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


# --------------------------------------------------------------------------- I/O


def _pgm_header(buf: bytes) -> tuple[str, int, int, int, int]:
    """Parse a PGM header; return (magic, width, height, maxval, payload offset)."""
    magic = buf[:2].decode("ascii", "replace")
    tokens: list[int] = []
    pos = 2
    n = len(buf)
    while len(tokens) < 3:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PayloadSizeError("PGM header truncated")
        try:
            tokens.append(int(buf[start:pos]))
        except ValueError:
            raise ImageFormatError(f"bad PGM header field {buf[start:pos]!r}") from None
    # exactly one whitespace byte separates the header from a binary payload
    pos += 1
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise UnsupportedFormatError(f"unsupported PGM maxval {maxval}")
    return magic, width, height, maxval, pos


def _decode_pgm(buf: bytes) -> np.ndarray:
    magic, width, height, maxval, offset = _pgm_header(buf)
    count = width * height
    if magic == "P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = buf[offset:]
        need = count * dtype.itemsize
        if len(payload) < need:
            raise PayloadSizeError(
                f"P5 payload holds {len(payload)} bytes, header requires {need}"
            )
        values = np.frombuffer(payload, dtype=dtype, count=count)
    else:
        fields = buf[offset:].split()
        if len(fields) != count:
            raise PayloadSizeError(
                f"P2 payload holds {len(fields)} samples, header requires {count}"
            )
        try:
            values = np.array([int(f) for f in fields], dtype=np.int64)
        except ValueError:
            raise ImageFormatError("non-integer sample in P2 payload") from None
    if values.max(initial=0) > maxval:
        raise ImageFormatError("sample exceeds declared maxval")
    return values.reshape(height, width).astype(np.float64) / maxval


def _decode_png(buf: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(buf)) as im:
        if im.mode != "L":
            raise UnsupportedFormatError(f"PNG must be 8-bit grayscale, got mode {im.mode}")
        arr = np.asarray(im, dtype=np.float64)
    return arr / 255.0


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a grayscale PGM (P2/P5, 8 or 16 bit) or 8-bit grayscale PNG.

    Intensities are divided by the format's maximum value so they lie in [0, 1].

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    UnsupportedFormatError
        The file is not one of the accepted formats.
    PayloadSizeError
        The header promises more pixels than the file contains.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:2] in (b"P2", b"P5"):
        return _decode_pgm(buf)
    if buf.startswith(_PNG_MAGIC):
        return _decode_png(buf)
    raise UnsupportedFormatError(f"{os.fspath(path)}: not a grayscale PGM or PNG file")


def to_bytes(image) -> np.ndarray:
    """Map an image or mask to the uint8 samples that :func:`save_image` writes."""
    arr = np.asarray(image)
    if arr.dtype == np.bool_:
        return np.where(arr, 255, 0).astype(np.uint8)
    img = as_image(arr)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(image, path: str | os.PathLike) -> None:
    """Write an image (clamped, scaled by 255, rounded half up) or mask as 8-bit P5."""
    data = to_bytes(image)
    if data.ndim != 2:
        raise ValueError("only 2-D grids can be saved")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


# ------------------------------------------------------------------ processing


def normalize_intensities(image) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant image becomes all zeros."""
    img = as_image(image)
    lo, hi = img.min(), img.max()
    if hi == lo:
        return np.zeros_like(img)
    out = (img - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0)


def convolve2d(image, kernel, border: BorderPolicy = "replicate") -> np.ndarray:
    """True 2-D convolution (kernel flipped) with same-size output.

    ``border`` chooses how reads outside the image resolve: ``replicate``
    repeats the edge pixel, ``reflect`` mirrors including the edge pixel
    (``cba|abc``), ``zero`` pads with zeros.
    """
    img = as_image(image)
    k = as_kernel(kernel)
    if border not in _PAD_MODES:
        raise ValueError(f"unknown border policy {border!r}")
    r = k.shape[0] // 2
    h, w = img.shape
    padded = np.pad(img, r, mode=_PAD_MODES[border])
    flipped = k[::-1, ::-1]
    out = np.zeros_like(img)
    # fixed accumulation order keeps results bit-reproducible
    for a in range(k.shape[0]):
        for b in range(k.shape[1]):
            wgt = flipped[a, b]
            if wgt != 0.0:
                out += wgt * padded[a : a + h, b : b + w]
    return out
