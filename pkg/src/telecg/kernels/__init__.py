"""Hot numeric kernels with a compiled core and a NumPy fallback.

The Cython extension is preferred when importable; set TELECG_PURE_PYTHON=1
to force the NumPy path (used by the benchmark and backend-parity tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _reference

_impl = _reference
BACKEND = "python"

if not os.environ.get("TELECG_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass


def _f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def moving_window_integral(x, width: int) -> np.ndarray:
    """Trailing-window mean over ``width`` samples (shorter at the start)."""
    if width < 1:
        raise ValueError("width must be >= 1")
    return np.asarray(_impl.moving_window_integral(_f64(x), int(width)))


def variable_window_mean(x, half_widths) -> np.ndarray:
    """Centered mean whose half width varies per sample."""
    x = _f64(x)
    hw = np.ascontiguousarray(half_widths, dtype=np.int64)
    if hw.shape != x.shape:
        raise ValueError("half_widths must match the signal length")
    if len(hw) and hw.min() < 0:
        raise ValueError("half widths must be non-negative")
    return np.asarray(_impl.variable_window_mean(x, hw))


def local_maxima(x) -> np.ndarray:
    """Indices of strict-rise local maxima of a 1-D signal."""
    return np.asarray(_impl.local_maxima(_f64(x)))
