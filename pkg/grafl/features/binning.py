# grafl/features/binning.py
import math

import numpy as np

from grafl.schemas.config import ConfigError


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {alpha}")
    return alpha


def log_bin(x: np.ndarray, alpha: float) -> np.ndarray:
    """
    Logarithmic binning on ranks.

    Sorted ascending, the first ceil(alpha * remaining) elements go to bin 0,
    the next ceil(alpha * remaining) of what is left to bin 1, and so on.
    A bin is extended over every element equal to its last value, so equal
    values always share a bin.
    """
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    bins = np.zeros(n, dtype=np.int64)
    if n == 0:
        return bins
    order = np.argsort(x, kind="stable")
    xs = x[order]
    start, b = 0, 0
    while start < n:
        k = max(1, math.ceil(alpha * (n - start)))
        end = int(np.searchsorted(xs, xs[start + k - 1], side="right"))
        bins[order[start:end]] = b
        b += 1
        start = end
    return bins


def bin_count(bins: np.ndarray) -> int:
    return int(bins.max()) + 1 if len(bins) else 0
