"""Luminance decoding, 8-bit grayscale encoding and atomic file output.

Decoding goes through Pillow (PNG, BMP, PGM and whatever else the installed
Pillow can open). Colour inputs are reduced to luminance with BT.601 weights
and kept in floating point; grayscale inputs pass through unchanged.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionError

# BT.601 luma weights in thousandths; integer accumulation keeps
# Y(255, 255, 255) == 255.0 exactly.
_LUMA_WEIGHTS = (299, 587, 114)

GRAY_EXTENSIONS = (".png", ".pgm")


def rgb_to_luminance(rgb: np.ndarray) -> np.ndarray:
    """Return ``0.299 R + 0.587 G + 0.114 B`` as float64, without rounding."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] < 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {rgb.shape}")
    r, g, b = (rgb[..., i].astype(np.float64) for i in range(3))
    wr, wg, wb = _LUMA_WEIGHTS
    return (wr * r + wg * g + wb * b) / 1000.0


def as_luminance(data, *, name: str = "image") -> np.ndarray:
    """Validate a 2-D grid as a luminance image and return it as float64."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name}: expected a 2-D grid, got shape {arr.shape}")
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise DimensionError(
            f"{name}: image is {arr.shape[1]}x{arr.shape[0]}, at least 2x2 is required"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: image contains non-finite values")
    return arr


def load_image(path) -> np.ndarray:
    """Decode ``path`` into a float64 luminance grid of shape (height, width)."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode in ("L", "I", "F") or mode.startswith("I;"):
                data = np.asarray(img, dtype=np.float64)
            elif mode in ("1", "LA"):
                data = np.asarray(img.convert("L"), dtype=np.float64)
            else:
                data = rgb_to_luminance(np.asarray(img.convert("RGB")))
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise DecodeError(f"cannot decode image {str(path)!r}: {exc}") from exc
    return as_luminance(data, name=str(path))


def to_gray8(data) -> np.ndarray:
    """Check that ``data`` is a 2-D grid of integers in [0, 255] and return uint8."""
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray output values must lie in [0, 255]")
        if not np.array_equal(arr, np.round(arr)):
            raise ValueError("gray output values must be integers")
        arr = arr.astype(np.uint8)
    return arr


def encode_pgm(data: np.ndarray) -> bytes:
    """Binary P5 encoding, maxval 255."""
    h, w = data.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(data).tobytes()


def encode_png(data: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(data), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def check_gray_extension(path) -> str:
    ext = Path(path).suffix.lower()
    if ext not in GRAY_EXTENSIONS:
        raise ValueError(
            f"unsupported output extension {ext!r} for {str(path)!r}; use .png or .pgm"
        )
    return ext


def write_gray(image, path) -> None:
    """Write an 8-bit grayscale image losslessly; the format follows the extension."""
    ext = check_gray_extension(path)
    data = to_gray8(image)
    payload = encode_png(data) if ext == ".png" else encode_pgm(data)
    atomic_write(path, payload)


def atomic_write(path, payload) -> None:
    """Write ``payload`` (bytes or str) to ``path`` via a temp file and rename.

    Either the complete file appears or nothing does.
    """
    path = Path(path)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
