"""Synthetic degradations: additive white noise, Gaussian blur, blockiness.

Blockiness is modelled without a codec by replacing every tile with its
mean, which reproduces the repeated flat blocks of heavy JPEG compression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imageio import as_luminance

KINDS = ("awgn", "gaussian_blur", "blockify")


def add_white_noise(image, sigma: float, seed: int = 0) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise from a PCG64 generator seeded with ``seed``; clamp to [0, 255]."""
    if not sigma >= 0:
        raise ValueError(f"noise sigma must be >= 0, got {sigma!r}")
    x = as_luminance(image)
    if sigma == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    noisy = x + sigma * rng.standard_normal(x.shape)
    return np.clip(noisy, 0.0, 255.0)


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    k = np.exp(-(np.arange(-radius, radius + 1, dtype=np.float64) ** 2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_axis(x: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = kernel.size // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(x, pad, mode="reflect")
    n = x.shape[axis]
    out = np.zeros_like(x)
    for t, weight in enumerate(kernel):
        window = padded[t : t + n] if axis == 0 else padded[:, t : t + n]
        out += weight * window
    return out


def gaussian_blur(image, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, radius ``ceil(3 sigma)``, mirror-padded borders."""
    if not sigma >= 0:
        raise ValueError(f"blur sigma must be >= 0, got {sigma!r}")
    x = as_luminance(image)
    if sigma == 0:
        return x.copy()
    k = gaussian_kernel(sigma)
    return _convolve_axis(_convolve_axis(x, k, 0), k, 1)


def blockify(image, block_side: int) -> np.ndarray:
    """Replace each ``block_side`` square tile (partial tiles at the edges included) by its mean."""
    if int(block_side) != block_side or block_side < 1:
        raise ValueError(f"block side must be an integer >= 1, got {block_side!r}")
    b = int(block_side)
    x = as_luminance(image)
    if b == 1:
        return x.copy()
    h, w = x.shape
    rows = np.arange(0, h, b)
    cols = np.arange(0, w, b)
    sums = np.add.reduceat(np.add.reduceat(x, rows, axis=0), cols, axis=1)
    counts = np.outer(np.diff(np.append(rows, h)), np.diff(np.append(cols, w)))
    means = sums / counts
    # uniform tiles keep their exact value, which makes the operation idempotent
    lo = np.minimum.reduceat(np.minimum.reduceat(x, rows, axis=0), cols, axis=1)
    hi = np.maximum.reduceat(np.maximum.reduceat(x, rows, axis=0), cols, axis=1)
    means = np.where(lo == hi, lo, means)
    return np.repeat(np.repeat(means, b, axis=0)[:h], b, axis=1)[:, :w]


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    severity: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distortion {self.kind!r}; expected one of {KINDS}")
        if self.kind == "blockify":
            if int(self.severity) != self.severity or self.severity < 1:
                raise ValueError(f"blockify needs an integer block side >= 1, got {self.severity!r}")
        elif not self.severity > 0:
            raise ValueError(f"{self.kind} severity must be > 0, got {self.severity!r}")

    def apply(self, image) -> np.ndarray:
        if self.kind == "awgn":
            return add_white_noise(image, self.severity, self.seed)
        if self.kind == "gaussian_blur":
            return gaussian_blur(image, self.severity)
        return blockify(image, int(self.severity))
