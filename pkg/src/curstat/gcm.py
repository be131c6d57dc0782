"""Weighted isotonic regression via pool-adjacent-violators.

The left slopes of the greatest convex minorant of the cumulative sum diagram
``(sum w_j, sum w_j y_j)`` are exactly the weighted isotonic least-squares fit
of ``y``; both entry points below share one stack-based PAVA kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateDiagram


@njit(cache=True, nogil=True)
def pava_sums(s, w, out):
    """Fit block means ``sum(s)/sum(w)`` into ``out``; return the block count.

    ``s`` holds weighted responses ``w_i * y_i``.  Indices with ``w_i <= 0``
    take the value of the block on their left (the first block if there is
    none).  Returns 0 when every weight is zero, leaving ``out`` untouched.
    """
    n = w.shape[0]
    bs = np.empty(n)
    bw = np.empty(n)
    start = np.empty(n, np.int64)
    nb = 0
    for i in range(n):
        if w[i] <= 0.0:
            continue
        bs[nb] = s[i]
        bw[nb] = w[i]
        start[nb] = i
        nb += 1
        # merge while the previous block mean is >= the last one (ties pooled)
        while nb > 1 and bs[nb - 2] * bw[nb - 1] >= bs[nb - 1] * bw[nb - 2]:
            bs[nb - 2] += bs[nb - 1]
            bw[nb - 2] += bw[nb - 1]
            nb -= 1
    if nb == 0:
        return 0
    start[0] = 0
    for b in range(nb):
        stop = start[b + 1] if b + 1 < nb else n
        v = bs[b] / bw[b]
        for i in range(start[b], stop):
            out[i] = v
    return nb


@njit(cache=True, nogil=True)
def pava_rows(S, W):
    """Row-wise :func:`pava_sums`; rows with no positive weight are NaN."""
    out = np.empty(S.shape)
    for r in range(S.shape[0]):
        if pava_sums(S[r], W[r], out[r]) == 0:
            out[r, :] = np.nan
    return out


@dataclass(frozen=True)
class CusumDiagram:
    """Points ``(x_i, y_i)`` starting at the origin, ``x`` nondecreasing."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DegenerateDiagram("x and y must be 1-d of equal length")
        if x.size < 2:
            raise DegenerateDiagram("a cusum diagram needs at least two points")
        if x[0] != 0 or y[0] != 0:
            raise DegenerateDiagram("diagram must start at (0, 0)")
        if np.any(np.diff(x) < 0):
            raise DegenerateDiagram("diagram abscissae must be nondecreasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_values(cls, values, weights) -> CusumDiagram:
        w = np.asarray(weights, dtype=float)
        v = np.asarray(values, dtype=float)
        return cls(np.concatenate(([0.0], np.cumsum(w))),
                   np.concatenate(([0.0], np.cumsum(w * v))))


def gcm_slopes(diagram: CusumDiagram) -> np.ndarray:
    """Left slopes of the greatest convex minorant, one per diagram segment.

    Segments of zero width (repeated abscissae from zero weights) inherit the
    slope of the pooled block they sit in.
    """
    dx = np.diff(diagram.x)
    dy = np.diff(diagram.y)
    vertical = (dx == 0) & (dy != 0)
    if np.any(vertical):
        raise DegenerateDiagram("vertical segment: zero weight with nonzero response")
    out = np.empty(dx.size)
    if pava_sums(np.ascontiguousarray(dy), np.ascontiguousarray(dx), out) == 0:
        raise DegenerateDiagram("all segments have zero width")
    return out


def weighted_isotonic_fit(values, weights) -> np.ndarray:
    """Minimize ``sum w_i (values_i - f_i)**2`` over nondecreasing ``f``."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise DegenerateDiagram("values and weights must be 1-d of equal length")
    if np.any(w < 0):
        raise DegenerateDiagram("weights must be nonnegative")
    out = np.empty(v.size)
    if v.size == 0 or pava_sums(w * v, w, out) == 0:
        raise DegenerateDiagram("no positive weight")
    return out
