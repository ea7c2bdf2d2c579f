"""Vectorised numpy implementation of the per-block kernels.

This is the fallback used when the compiled ``_kernels`` extension is not
available. Every expression follows the same evaluation order as the
Cython kernel and the scalar reference in :mod:`stemnoise.ar_core`, so all
three produce bit-identical results.
"""

import numpy as np

BACKEND = "python"


def _split_blocks(xhat):
    h, w = xhat.shape
    bh, bw = h // 2, w // 2
    b = xhat[: 2 * bh, : 2 * bw]
    # scan order top-left, top-right, bottom-left, bottom-right == n-3 .. n
    return b[0::2, 0::2], b[0::2, 1::2], b[1::2, 0::2], b[1::2, 1::2]


def _acf(x0, x1, x2, x3, full_r1):
    r0 = (x3 * x3 + x2 * x2 + x1 * x1 + x0 * x0) / 4.0
    if full_r1:
        r1 = (x3 * x2 + x2 * x1 + x1 * x0) / 3.0
    else:
        r1 = (x3 * x2 + x1 * x0) / 2.0
    r2 = (x3 * x1 + x2 * x0) / 2.0
    r3 = x3 * x0
    return r0, r1, r2, r3


def _levinson(r0, r1, r2, r3, epsilon):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        degenerate = ~(r0 > epsilon)
        k1 = -r1 / r0
        e1 = r0 * (1.0 - k1 * k1)
        degenerate |= np.abs(e1) < epsilon * r0
        k2 = -(r2 + k1 * r1) / e1
        a1 = k1 + k2 * k1
        a2 = k2
        e2 = e1 * (1.0 - k2 * k2)
        degenerate |= np.abs(e2) < epsilon * r0
        k3 = -(r3 + a1 * r2 + a2 * r1) / e2
        c1 = a1 + k3 * a2
        c2 = a2 + k3 * a1
        c3 = k3
    c1 = np.where(degenerate, 0.0, c1)
    c2 = np.where(degenerate, 0.0, c2)
    c3 = np.where(degenerate, 0.0, c3)
    b0_sq = r0 + c1 * r1 + c2 * r2 + c3 * r3
    return c1, c2, c3, b0_sq, degenerate


def _energy(r, a):
    # sum_i sum_j (a_i * a_j) * R(|i - j|), row-major accumulation from 0.0
    total = 0.0
    for i in range(4):
        for j in range(4):
            total = total + (a[i] * a[j]) * r[abs(i - j)]
    return total


def block_fit(xhat, full_r1, epsilon):
    """Fit every 2x2 block of ``xhat``.

    Returns ``(acf, coeffs, b0_sq, energy, degenerate, secondary)`` with
    shapes ``(bh, bw, 4)``, ``(bh, bw, 3)``, ``(bh, bw)`` x3 and ``(bh, bw)``.
    """
    xhat = np.ascontiguousarray(xhat, dtype=np.float64)
    x0, x1, x2, x3 = _split_blocks(xhat)
    r = _acf(x0, x1, x2, x3, bool(full_r1))
    c1, c2, c3, b0_sq, degenerate = _levinson(*r, float(epsilon))
    energy = _energy(r, (np.ones_like(c1), c1, c2, c3))
    acf = np.stack(r, axis=-1)
    coeffs = np.stack((c1, c2, c3), axis=-1)
    return acf, coeffs, b0_sq, np.asarray(energy), degenerate, x2 * x1


def solve_batch(acf, epsilon):
    """Levinson-Durbin on ``(n, 4)`` lags; returns ``(coeffs, b0_sq, degenerate)``."""
    acf = np.ascontiguousarray(acf, dtype=np.float64)
    c1, c2, c3, b0_sq, degenerate = _levinson(
        acf[:, 0], acf[:, 1], acf[:, 2], acf[:, 3], float(epsilon)
    )
    return np.stack((c1, c2, c3), axis=-1), b0_sq, degenerate


def energy_batch(acf, coeffs):
    acf = np.ascontiguousarray(acf, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    a = (np.ones(len(acf)), coeffs[:, 0], coeffs[:, 1], coeffs[:, 2])
    r = (acf[:, 0], acf[:, 1], acf[:, 2], acf[:, 3])
    return np.asarray(_energy(r, a), dtype=np.float64)
