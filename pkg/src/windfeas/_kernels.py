"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set ``WINDFEAS_DISABLE_NUMBA=1`` to force the numpy path (also used
automatically when numba is not importable). Both paths compute window
statistics with a two-pass scheme so a constant window yields a standard
deviation of exactly 0.0.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "USING_NUMBA",
    "sliding_mean_std",
    "impute_cascade",
    "sliding_mean_std_np",
    "impute_cascade_py",
]

_DISABLED = os.environ.get("WINDFEAS_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

try:
    if _DISABLED:
        raise ImportError("numba disabled via WINDFEAS_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def sliding_mean_std_np(values: np.ndarray, width: int, stride: int = 1):
    """Mean / population std of each sliding window (numpy path).

    Windows start at 0, width*1, ... with the given stride, entirely inside
    ``values``. A window containing NaN gets mean = std = NaN and
    valid = False.

    Returns (means, stds, valid) arrays of length
    ``(n - width) // stride + 1`` (0 if the series is shorter than width).
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if width < 1 or stride < 1:
        raise ValueError("width and stride must be >= 1")
    if v.size < width:
        empty = np.empty(0, dtype=np.float64)
        return empty, empty.copy(), np.empty(0, dtype=bool)
    wins = sliding_window_view(v, width)[::stride]
    valid = ~np.isnan(wins).any(axis=1)
    means = wins.mean(axis=1)
    stds = wins.std(axis=1)
    return means, stds, valid


def impute_cascade_py(values: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Impute ``targets`` (ascending indices) from the 4-point neighbour window.

    Each target becomes the mean of the available (non-NaN) values among
    offsets {-2, -1, +1, +2}; processing is left to right so earlier
    imputations feed later ones. Targets whose whole window is unavailable
    are left NaN. Returns a new array.
    """
    v = np.array(values, dtype=np.float64, copy=True)
    n = v.size
    for t in np.asarray(targets, dtype=np.int64):
        acc = 0.0
        cnt = 0
        for off in (-2, -1, 1, 2):
            j = t + off
            if 0 <= j < n and not np.isnan(v[j]):
                acc += v[j]
                cnt += 1
        if cnt > 0:
            v[t] = acc / cnt
    return v


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sliding_mean_std_jit(v, width, stride):  # pragma: no cover - jit twin
        n = v.size
        n_wins = (n - width) // stride + 1 if n >= width else 0
        means = np.full(n_wins, np.nan)
        stds = np.full(n_wins, np.nan)
        valid = np.zeros(n_wins, dtype=np.bool_)
        for i in range(n_wins):
            s = i * stride
            ok = True
            acc = 0.0
            for j in range(s, s + width):
                x = v[j]
                if np.isnan(x):
                    ok = False
                    break
                acc += x
            if not ok:
                continue
            m = acc / width
            sq = 0.0
            for j in range(s, s + width):
                d = v[j] - m
                sq += d * d
            means[i] = m
            stds[i] = np.sqrt(sq / width)
            valid[i] = True
        return means, stds, valid

    @njit(cache=True, nogil=True)
    def _impute_cascade_jit(v, targets):  # pragma: no cover - jit twin
        n = v.size
        for k in range(targets.size):
            t = targets[k]
            acc = 0.0
            cnt = 0
            for off in (-2, -1, 1, 2):
                j = t + off
                if 0 <= j < n and not np.isnan(v[j]):
                    acc += v[j]
                    cnt += 1
            if cnt > 0:
                v[t] = acc / cnt
        return v

    def sliding_mean_std_nb(values, width, stride=1):
        v = np.ascontiguousarray(values, dtype=np.float64)
        if width < 1 or stride < 1:
            raise ValueError("width and stride must be >= 1")
        return _sliding_mean_std_jit(v, width, stride)

    def impute_cascade_nb(values, targets):
        v = np.array(values, dtype=np.float64, copy=True)
        return _impute_cascade_jit(v, np.ascontiguousarray(targets, dtype=np.int64))

    __all__ += ["sliding_mean_std_nb", "impute_cascade_nb"]


USING_NUMBA = HAVE_NUMBA

if USING_NUMBA:
    sliding_mean_std = sliding_mean_std_nb
    impute_cascade = impute_cascade_nb
else:
    sliding_mean_std = sliding_mean_std_np
    impute_cascade = impute_cascade_py
