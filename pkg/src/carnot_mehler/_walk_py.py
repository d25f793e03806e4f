"""NumPy fallback for the walk accumulation; same formulas as the compiled kernel."""

from __future__ import annotations

import numpy as np


def _bracket(u: np.ndarray, v: np.ndarray, bi, bj, bm, bc) -> np.ndarray:
    out = np.zeros_like(u)
    for i, j, m, c in zip(bi, bj, bm, bc):
        out[:, m] += c * u[:, i] * v[:, j]
    return out


def accumulate(increments: np.ndarray, first: np.ndarray, bi: np.ndarray, bj: np.ndarray,
               bm: np.ndarray, bc: np.ndarray, dim: int, step: int) -> np.ndarray:
    """Fold ``z <- log(exp(z) exp(b))`` over the walk steps, vectorized over samples."""
    if step > 3:
        raise ValueError("walk accumulation supports step <= 3")
    n, steps, _ = increments.shape
    z = np.zeros((n, dim))
    b = np.zeros((n, dim))
    entries = (bi.tolist(), bj.tolist(), bm.tolist(), bc.tolist())
    for m in range(steps):
        b[:, first] = increments[:, m, :]
        if not entries[0]:
            z += b
            continue
        zb = _bracket(z, b, *entries)
        if step >= 3:
            z += b + 0.5 * zb + (_bracket(z, zb, *entries) - _bracket(b, zb, *entries)) / 12.0
        else:
            z += b + 0.5 * zb
    return z
