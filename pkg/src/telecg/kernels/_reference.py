"""NumPy reference implementations of the hot kernels.

Used whenever the compiled extension is unavailable and as the ground truth
the compiled twin is benchmarked and tested against.
"""

from __future__ import annotations

import numpy as np


def moving_window_integral(x: np.ndarray, width: int) -> np.ndarray:
    """Trailing-window mean: y[i] = mean(x[max(0, i-width+1) .. i])."""
    n = len(x)
    csum = np.empty(n + 1, dtype=np.float64)
    csum[0] = 0.0
    np.cumsum(x, out=csum[1:])
    hi = np.arange(1, n + 1)
    lo = np.maximum(hi - width, 0)
    return (csum[hi] - csum[lo]) / (hi - lo)


def variable_window_mean(x: np.ndarray, half_widths: np.ndarray) -> np.ndarray:
    """Centered mean with a per-sample half width, clipped at the edges.

    y[i] = mean(x[max(0, i-h[i]) .. min(n-1, i+h[i])])
    """
    n = len(x)
    csum = np.empty(n + 1, dtype=np.float64)
    csum[0] = 0.0
    np.cumsum(x, out=csum[1:])
    idx = np.arange(n)
    lo = np.maximum(idx - half_widths, 0)
    hi = np.minimum(idx + half_widths + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices of strict-rise local maxima (first sample of any plateau)."""
    if len(x) < 3:
        return np.empty(0, dtype=np.int64)
    inner = (x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])
    return np.flatnonzero(inner).astype(np.int64) + 1
