"""Block-wise third-order autoregressive modelling of a normalised image.

The image is cut into non-overlapping 2x2 blocks. Each block is read in
row-major order as the sequence ``x[n-3], x[n-2], x[n-1], x[n]`` and
modelled as

    x[n] + a1 x[n-1] + a2 x[n-2] + a3 x[n-3] = b0 i[n]

with ``i`` white. The coefficients come from the Yule-Walker equations on
the block's sample autocorrelation, solved by Levinson-Durbin recursion,
and the stem noise energy is the expected square of the left-hand side,

    sum_i sum_j a_i a_j R(|i - j|),   a_0 = 1.

The scalar functions here are the readable reference; the whole-image path
(:func:`compute_energy_map`) runs through the compiled or numpy kernels,
which reproduce the scalar arithmetic exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from ._backend import kernels
from .errors import DimensionError
from .normalization import NormalizedImage

MODEL_ORDER = 3
BLOCK_SIDE = 2

EXCLUDED_R1 = "excluded_r1"
FULL_R1 = "full_r1"
ACF_MODES = (EXCLUDED_R1, FULL_R1)

# Guard of the bare solver: only catches numerically singular systems.
SOLVER_EPSILON = 1e-12
# Guard used on images. Four-sample autocorrelations are frequently close to
# singular and the resulting energies have 1/x tails; blocks whose
# normalised prediction error drops below this fraction are treated as
# degenerate so that per-image means are stable.
PIPELINE_EPSILON = 0.2


def check_mode(mode: str) -> str:
    if mode not in ACF_MODES:
        raise ValueError(f"unknown ACF mode {mode!r}; expected one of {ACF_MODES}")
    return mode


@dataclass(frozen=True)
class BlockLayout:
    blocks_down: int
    blocks_across: int
    model_order: int = MODEL_ORDER

    @property
    def block_side(self) -> int:
        return int(round((self.model_order + 1) ** 0.5))

    @property
    def block_count(self) -> int:
        return self.blocks_down * self.blocks_across

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocks_down, self.blocks_across

    @classmethod
    def for_image(cls, height: int, width: int, model_order: int = MODEL_ORDER) -> "BlockLayout":
        side = int(round((model_order + 1) ** 0.5))
        layout = cls(height // side, width // side, model_order)
        if layout.block_count == 0:
            raise DimensionError(
                f"a {width}x{height} image holds no {side}x{side} block"
            )
        return layout


class BlockSequence(NamedTuple):
    """One block flattened by row-major scan: ``(x[n-3], x[n-2], x[n-1], x[n])``."""

    n3: float
    n2: float
    n1: float
    n0: float


class AcfEstimate(NamedTuple):
    r0: float
    r1: float
    r2: float
    r3: float
    mode: str = EXCLUDED_R1

    @property
    def lags(self) -> tuple[float, float, float, float]:
        return (self.r0, self.r1, self.r2, self.r3)


class ArParams(NamedTuple):
    a1: float
    a2: float
    a3: float
    b0_sq: float
    degenerate: bool = False

    a0 = 1.0

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (1.0, self.a1, self.a2, self.a3)


def _values(norm) -> np.ndarray:
    return norm.values if isinstance(norm, NormalizedImage) else np.asarray(norm, dtype=np.float64)


def partition_blocks(norm) -> tuple[BlockLayout, Iterator[BlockSequence]]:
    """Block layout plus a row-major iterator over the flattened blocks.

    A trailing odd row or column is dropped.
    """
    values = _values(norm)
    if values.ndim != 2:
        raise DimensionError(f"expected a 2-D grid, got shape {values.shape}")
    layout = BlockLayout.for_image(*values.shape)

    def blocks():
        for i in range(layout.blocks_down):
            for j in range(layout.blocks_across):
                u, v = 2 * i, 2 * j
                yield BlockSequence(
                    float(values[u, v]),
                    float(values[u, v + 1]),
                    float(values[u + 1, v]),
                    float(values[u + 1, v + 1]),
                )

    return layout, blocks()


def estimate_acf(block, mode: str = EXCLUDED_R1) -> AcfEstimate:
    """Per-lag mean of the lag products inside one block.

    ``excluded_r1`` leaves the secondary-diagonal pair ``x[n-1] x[n-2]`` out
    of R(1); ``full_r1`` keeps all three lag-1 products.
    """
    check_mode(mode)
    x0, x1, x2, x3 = (float(v) for v in block)
    r0 = (x3 * x3 + x2 * x2 + x1 * x1 + x0 * x0) / 4.0
    if mode == FULL_R1:
        r1 = (x3 * x2 + x2 * x1 + x1 * x0) / 3.0
    else:
        r1 = (x3 * x2 + x1 * x0) / 2.0
    r2 = (x3 * x1 + x2 * x0) / 2.0
    r3 = x3 * x0
    return AcfEstimate(r0, r1, r2, r3, mode)


def _lags(acf) -> tuple[float, float, float, float]:
    if isinstance(acf, AcfEstimate):
        return acf.lags
    r0, r1, r2, r3 = (float(v) for v in acf)
    return r0, r1, r2, r3


def solve_yule_walker(acf, epsilon: float = SOLVER_EPSILON) -> ArParams:
    """Solve the order-3 Yule-Walker system by Levinson-Durbin recursion.

    A block is degenerate when ``R(0) <= epsilon`` or when a prediction
    error used as a divisor falls below ``epsilon * R(0)`` in magnitude.
    Degenerate blocks get zero coefficients and ``b0_sq = R(0)``.
    """
    r0, r1, r2, r3 = _lags(acf)
    if not r0 > epsilon:
        return ArParams(0.0, 0.0, 0.0, r0, True)
    k1 = -r1 / r0
    e1 = r0 * (1.0 - k1 * k1)
    if abs(e1) < epsilon * r0:
        return ArParams(0.0, 0.0, 0.0, r0, True)
    k2 = -(r2 + k1 * r1) / e1
    a1 = k1 + k2 * k1
    a2 = k2
    e2 = e1 * (1.0 - k2 * k2)
    if abs(e2) < epsilon * r0:
        return ArParams(0.0, 0.0, 0.0, r0, True)
    k3 = -(r3 + a1 * r2 + a2 * r1) / e2
    c1 = a1 + k3 * a2
    c2 = a2 + k3 * a1
    c3 = k3
    b0_sq = r0 + c1 * r1 + c2 * r2 + c3 * r3
    return ArParams(c1, c2, c3, b0_sq, False)


def stem_noise_energy(acf, ar) -> float:
    """Expected square of the AR residual, ``sum_ij a_i a_j R(|i-j|)``.

    Accumulated over ``i`` then ``j`` from 0.0. Grouped by lag this is
    ``R0 sum a_m^2 + 2 R1 sum a_m a_{m+1} + 2 R2 sum a_m a_{m+2} + 2 R3 a_0 a_3``.
    """
    r = _lags(acf)
    a = ar.coefficients if isinstance(ar, ArParams) else (1.0, *(float(v) for v in ar))
    total = 0.0
    for i in range(4):
        for j in range(4):
            total = total + (a[i] * a[j]) * r[abs(i - j)]
    return total


@dataclass(frozen=True)
class BlockFit:
    """Per-block results for one image.

    ``energy`` is the stem noise energy map; the other grids share its
    ``(blocks_down, blocks_across)`` leading shape.
    """

    layout: BlockLayout
    mode: str
    epsilon: float
    acf: np.ndarray
    coeffs: np.ndarray
    b0_sq: np.ndarray
    energy: np.ndarray
    degenerate: np.ndarray
    secondary_diagonal: np.ndarray

    def params_at(self, i: int, j: int) -> ArParams:
        a1, a2, a3 = (float(v) for v in self.coeffs[i, j])
        return ArParams(a1, a2, a3, float(self.b0_sq[i, j]), bool(self.degenerate[i, j]))


def compute_energy_map(
    norm, mode: str = EXCLUDED_R1, epsilon: float = PIPELINE_EPSILON, *, backend=None
) -> BlockFit:
    """Fit every block of a normalised image and evaluate its stem noise energy."""
    check_mode(mode)
    values = _values(norm)
    if values.ndim != 2:
        raise DimensionError(f"expected a 2-D grid, got shape {values.shape}")
    layout = BlockLayout.for_image(*values.shape)
    impl = backend or kernels
    acf, coeffs, b0_sq, energy, degenerate, secondary = impl.block_fit(
        values, mode == FULL_R1, float(epsilon)
    )
    return BlockFit(
        layout=layout,
        mode=mode,
        epsilon=float(epsilon),
        acf=acf,
        coeffs=coeffs,
        b0_sq=b0_sq,
        energy=energy,
        degenerate=degenerate,
        secondary_diagonal=secondary,
    )


def solve_yule_walker_batch(acf, epsilon: float = SOLVER_EPSILON, *, backend=None):
    """Vectorised :func:`solve_yule_walker` over an ``(n, 4)`` array of lags.

    Returns ``(coeffs, b0_sq, degenerate)`` with shapes ``(n, 3)``, ``(n,)``, ``(n,)``.
    """
    acf = np.atleast_2d(np.asarray(acf, dtype=np.float64))
    if acf.shape[1] != 4:
        raise ValueError(f"expected lags of shape (n, 4), got {acf.shape}")
    return (backend or kernels).solve_batch(acf, float(epsilon))


def stem_noise_energy_batch(acf, coeffs, *, backend=None) -> np.ndarray:
    acf = np.atleast_2d(np.asarray(acf, dtype=np.float64))
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
    if acf.shape[1] != 4 or coeffs.shape != (acf.shape[0], 3):
        raise ValueError(f"shape mismatch: lags {acf.shape}, coefficients {coeffs.shape}")
    return (backend or kernels).energy_batch(acf, coeffs)
