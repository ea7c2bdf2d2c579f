"""Reductions of a stem noise energy map to quality-aware statistics.

All variances are population variances (divide by the block count) and are
computed in two passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError


def _as_map(energy, name="energy map") -> np.ndarray:
    arr = np.asarray(energy, dtype=np.float64)
    if arr.size == 0:
        raise DimensionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _mean_var(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    d = values - mean
    return mean, float(np.mean(d * d))


@dataclass(frozen=True)
class EnergyStats:
    mean: float
    variance: float
    mean_abs: float
    block_count: int

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "mean_abs": self.mean_abs,
            "block_count": self.block_count,
        }


def energy_stats(energy) -> EnergyStats:
    e = _as_map(energy).ravel()
    mean, var = _mean_var(e)
    return EnergyStats(mean, var, float(np.mean(np.abs(e))), int(e.size))


def footprint_point(stats: EnergyStats) -> tuple[float, float]:
    """Position of one image in the (mean, variance) energy plane."""
    return stats.mean, stats.variance


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    heights: np.ndarray
    underflow: int = 0
    overflow: int = 0

    def rows(self):
        for lo, hi, h in zip(self.bin_edges[:-1], self.bin_edges[1:], self.heights):
            yield float(lo), float(hi), float(h)


def _default_range(e: np.ndarray, bins: int) -> tuple[float, float]:
    lo, hi = float(e.min()), float(e.max())
    top = hi + 1e-12
    if top <= hi:
        # 1e-12 vanishes next to large magnitudes
        top = float(np.nextafter(hi, np.inf))
    # near-constant maps with large magnitudes: keep every bin edge distinct
    min_width = 4 * bins * float(np.spacing(max(abs(lo), abs(hi))))
    if top - lo < min_width:
        top = lo + min_width
    return lo, top


def energy_histogram(energy, bins: int = 64, value_range=None) -> Histogram:
    """Equal-width histogram normalised to unit total mass.

    Without ``value_range`` the bins span ``[min, max + 1e-12]``. A value
    lying exactly on an interior edge goes to the upper bin; values outside
    an explicit range are clamped into the end bins.
    """
    if int(bins) != bins or bins < 1:
        raise ValueError(f"bins must be a positive integer, got {bins!r}")
    bins = int(bins)
    e = _as_map(energy).ravel()
    if value_range is None:
        lo, hi = _default_range(e, bins)
    else:
        lo, hi = (float(v) for v in value_range)
        if not lo < hi:
            raise ValueError(f"histogram range needs lo < hi, got ({lo}, {hi})")
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.searchsorted(edges, e, side="right") - 1
    idx = np.clip(idx, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(bin_edges=edges, heights=counts / e.size)


def render_snem(energy) -> np.ndarray:
    """Min-max scale an energy map to 8-bit gray, rounding half up.

    Scaled intensities are snapped to 1e-9 before rounding so that positive
    affine transforms of the map do not flip ties through rounding noise.
    A map with no spread renders as all zeros.
    """
    e = _as_map(energy)
    lo, hi = float(e.min()), float(e.max())
    if not hi > lo:
        return np.zeros(e.shape, dtype=np.uint8)
    scaled = np.round((e - lo) / (hi - lo) * 255.0, 9)
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class ArStats:
    """Means and variances of the AR coefficients over blocks.

    The lag-1, lag-2 and lag-3 coefficients are reported as horizontal,
    vertical and main-diagonal. The model has no fourth coefficient, so the
    secondary-diagonal entry is the per-block pixel product
    ``x[n-1] x[n-2]`` (bottom-left times top-right).
    """

    mean_ar: float
    var_ar: float
    mean_horizontal: float
    var_horizontal: float
    mean_vertical: float
    var_vertical: float
    mean_main_diagonal: float
    var_main_diagonal: float
    mean_secondary_diagonal: float
    var_secondary_diagonal: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def ar_statistics(coeffs, secondary_diagonal) -> ArStats:
    """Reduce an ``(..., 3)`` coefficient grid and the secondary-diagonal products."""
    a = np.asarray(coeffs, dtype=np.float64)
    s = np.asarray(secondary_diagonal, dtype=np.float64).ravel()
    if a.size == 0 or s.size == 0:
        raise DimensionError("AR statistics need at least one block")
    a = a.reshape(-1, 3)
    if a.shape[0] != s.size:
        raise DimensionError(
            f"{a.shape[0]} coefficient triples but {s.size} secondary-diagonal products"
        )
    pooled = _mean_var(a.ravel())
    h = _mean_var(a[:, 0])
    v = _mean_var(a[:, 1])
    d = _mean_var(a[:, 2])
    sd = _mean_var(s)
    return ArStats(*pooled, *h, *v, *d, *sd)


@dataclass(frozen=True)
class LabelMap:
    labels: np.ndarray
    thresholds: np.ndarray

    @property
    def k(self) -> int:
        return len(self.thresholds) + 1

    def to_gray(self) -> np.ndarray:
        """Labels spread evenly over 0..255."""
        k = self.k
        return np.floor(self.labels * 255.0 / (k - 1) + 0.5).astype(np.uint8)


def _multi_otsu_bins(prob: np.ndarray, centers: np.ndarray, k: int) -> list[int]:
    """Split bins into ``k`` non-empty contiguous classes maximising between-class variance.

    Returns the first bin index of classes 1..k-1. Dynamic programming over
    ``sum_c S_c^2 / W_c`` (the total mean term of the between-class variance
    is constant); the first optimum in bin order wins ties.
    """
    n = prob.size
    w_cum = np.concatenate(([0.0], np.cumsum(prob)))
    s_cum = np.concatenate(([0.0], np.cumsum(prob * centers)))

    neg = -np.inf
    best = np.full((k + 1, n + 1), neg)
    arg = np.zeros((k + 1, n + 1), dtype=int)
    best[0, 0] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for c in range(1, k + 1):
            for j in range(c, n + 1):
                # last class covers bins [i, j)
                i = np.arange(c - 1, j)
                w = w_cum[j] - w_cum[i]
                sc = s_cum[j] - s_cum[i]
                vals = np.where(w > 0, best[c - 1, i] + sc * sc / w, neg)
                pos = int(np.argmax(vals))
                best[c, j] = vals[pos]
                arg[c, j] = i[pos]
    if best[k, n] == neg:
        raise DegenerateInputError(f"cannot form {k} non-empty classes from the histogram")
    starts = []
    j = n
    for c in range(k, 0, -1):
        i = arg[c, j]
        starts.append(i)
        j = i
    return sorted(starts)[1:]


def threshold_segment(energy, k: int = 3, nbins: int = 256) -> LabelMap:
    """Multi-level Otsu segmentation of an energy map into ``k`` classes.

    Thresholds are bin edges of an ``nbins``-bin histogram over the map's
    range; each block takes the class of its histogram bin.
    """
    if int(k) != k or k < 2:
        raise ValueError(f"class count k must be an integer >= 2, got {k!r}")
    k = int(k)
    e = _as_map(energy)
    distinct = np.unique(e)
    if distinct.size < k:
        raise DegenerateInputError(
            f"energy map has {distinct.size} distinct value(s), {k} classes requested"
        )
    hist = energy_histogram(e, bins=nbins)
    edges = hist.bin_edges
    centers = 0.5 * (edges[:-1] + edges[1:])
    starts = _multi_otsu_bins(hist.heights, centers, k)
    thresholds = edges[starts]
    bin_idx = np.clip(np.searchsorted(edges, e, side="right") - 1, 0, nbins - 1)
    labels = np.searchsorted(np.asarray(starts), bin_idx, side="right")
    return LabelMap(labels=labels.astype(np.int64), thresholds=thresholds)
