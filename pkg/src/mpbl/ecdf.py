"""Empirical CDF of transformed residuals with the 1/n^2 clamp.

build_index sorts the residuals v_i = y_i^(lam) - x_i' beta once; g_hat then
answers each query by binary search for the rightmost element <= t, and f_hat
clamps the result into [n^-2, 1 - n^-2] so downstream logarithms stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Theta
from .transform import boxcox

__all__ = ["EcdfIndex", "build_index", "g_hat", "f_hat"]


@dataclass(frozen=True, eq=False)
class EcdfIndex:
    """Sorted residual sample backing O(log n) CDF queries."""

    sorted_v: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.sorted_v, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "sorted_v", v)
        if v.shape[0] != self.n:
            raise ValueError(f"index length {v.shape[0]} != n={self.n}")


def residuals(data: Dataset, theta: Theta) -> np.ndarray:
    """Transformed residuals y^(lam) - x' beta in row order."""
    return boxcox(data.y, theta.lam) - data.x @ theta.beta


def build_index(data: Dataset, theta: Theta) -> EcdfIndex:
    """Sort the residual sample of (data, theta) into a query index."""
    v = residuals(data, theta)
    return EcdfIndex(sorted_v=np.sort(v, kind="stable"), n=data.n)


def g_hat(index: EcdfIndex, t):
    """Raw empirical CDF: fraction of residuals <= t.

    Ties count fully: the indicator is non-strict, so searchsorted targets
    the rightmost element <= t.
    """
    counts = np.searchsorted(index.sorted_v, t, side="right")
    out = counts / index.n
    return float(out) if np.ndim(t) == 0 else out


def f_hat(index: EcdfIndex, t):
    """Clamped empirical CDF: g_hat pulled into [n^-2, 1 - n^-2].

    The floor only activates where g_hat is exactly 0 (the smallest positive
    value 1/n already exceeds n^-2), but the clamp is applied as written so
    the behavior is exact for any n.
    """
    lo = 1.0 / (index.n * index.n)
    out = np.minimum(np.maximum(g_hat(index, t), lo), 1.0 - lo)
    return float(out) if np.ndim(t) == 0 else out
