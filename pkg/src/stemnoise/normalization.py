"""Local mean subtraction and contrast normalisation (MSCN).

Each pixel is replaced by ``(x - mu) / (sigma + c)`` where ``mu`` and
``sigma`` are the weighted mean and standard deviation over a small window
centred on the pixel. Borders are mirror padded (reflect without repeating
the edge pixel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imageio import as_luminance


def uniform_weights(half_k: int = 1, half_l: int = 1) -> np.ndarray:
    shape = (2 * half_k + 1, 2 * half_l + 1)
    return np.full(shape, 1.0 / (shape[0] * shape[1]))


def gaussian_weights(half_k: int = 1, half_l: int = 1, sigma: float = 1.0) -> np.ndarray:
    """Separable Gaussian window normalised to unit sum."""
    ky = np.exp(-(np.arange(-half_k, half_k + 1) ** 2) / (2.0 * sigma**2))
    kx = np.exp(-(np.arange(-half_l, half_l + 1) ** 2) / (2.0 * sigma**2))
    w = np.outer(ky, kx)
    return w / w.sum()


WEIGHT_PRESETS = {"uniform": uniform_weights, "gaussian": gaussian_weights}


@dataclass(frozen=True)
class NormalizationConfig:
    """Window weights and stabiliser.

    ``weights`` has shape ``(2K+1, 2L+1)``, is non-negative and sums to 1.
    """

    weights: np.ndarray = field(default_factory=uniform_weights)
    c: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"weights must be an odd-sided 2-D window, got shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if not self.c > 0:
            raise ValueError(f"stabiliser c must be positive, got {self.c!r}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def preset(cls, name: str = "uniform", c: float = 1.0) -> "NormalizationConfig":
        try:
            make = WEIGHT_PRESETS[name]
        except KeyError:
            raise ValueError(
                f"unknown window preset {name!r}; choose from {sorted(WEIGHT_PRESETS)}"
            ) from None
        return cls(weights=make(), c=c)

    @property
    def half_extents(self) -> tuple[int, int]:
        return self.weights.shape[0] // 2, self.weights.shape[1] // 2


@dataclass(frozen=True)
class NormalizedImage:
    values: np.ndarray
    mean_map: np.ndarray
    std_map: np.ndarray
    c: float

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _window_views(image: np.ndarray, half_k: int, half_l: int):
    """Yield ``(k, l, shifted)`` where ``shifted[u, v] == x(u + k, v + l)`` under mirror padding."""
    padded = np.pad(image, ((half_k, half_k), (half_l, half_l)), mode="reflect")
    h, w = image.shape
    for k in range(-half_k, half_k + 1):
        for l in range(-half_l, half_l + 1):
            yield k, l, padded[half_k + k : half_k + k + h, half_l + l : half_l + l + w]


def local_moments(image, cfg: NormalizationConfig | None = None):
    """Weighted local mean and standard deviation maps.

    The deviation is accumulated directly as ``sum w (x - mu)**2`` rather
    than through ``E[x^2] - mu^2``, which cancels badly on flat regions.
    Windows whose values are all equal get ``mu == x`` and ``sigma == 0``
    exactly; unit-sum weights would otherwise leave rounding residue there.
    """
    cfg = cfg or NormalizationConfig()
    x = as_luminance(image)
    half_k, half_l = cfg.half_extents
    w = cfg.weights

    mu = np.zeros_like(x)
    lo = np.full_like(x, np.inf)
    hi = np.full_like(x, -np.inf)
    for k, l, shifted in _window_views(x, half_k, half_l):
        weight = w[k + half_k, l + half_l]
        mu += weight * shifted
        if weight > 0:
            np.minimum(lo, shifted, out=lo)
            np.maximum(hi, shifted, out=hi)
    flat = lo == hi
    mu[flat] = x[flat]

    var = np.zeros_like(x)
    for k, l, shifted in _window_views(x, half_k, half_l):
        d = shifted - mu
        var += w[k + half_k, l + half_l] * (d * d)
    var[flat] = 0.0
    return mu, np.sqrt(var)


def normalize(image, cfg: NormalizationConfig | None = None) -> NormalizedImage:
    cfg = cfg or NormalizationConfig()
    x = as_luminance(image)
    mu, sigma = local_moments(x, cfg)
    values = (x - mu) / (sigma + cfg.c)
    return NormalizedImage(values=values, mean_map=mu, std_map=sigma, c=cfg.c)
