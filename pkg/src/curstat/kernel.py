"""Triweight kernel, its integral and derivative, and reflection-corrected smoothers.

All smoothers here are linear in the jump measure ``p`` of a step function, so
they are built from "design matrices": ``value(t) = offset(t) + A(t) @ p``.
The bootstrap code reuses these matrices across replicates.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .data import StepDistribution
from .errors import InvalidBandwidth, InvalidDatum

MOMENT2 = Fraction(1, 9)
L2NORM = Fraction(350, 429)


def k_density(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) <= 1.0
    return np.where(inside, 35.0 / 32.0 * (1.0 - u * u) ** 3, 0.0)


def k_integrated(u):
    """``int_{-inf}^u K``; exact degree-7 antiderivative."""
    u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
    u2 = u * u
    return 0.5 + 35.0 / 32.0 * u * (1.0 - u2 + u2 * u2 * (0.6 - u2 / 7.0))


def k_derivative(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) <= 1.0
    return np.where(inside, -105.0 / 16.0 * u * (1.0 - u * u) ** 2, 0.0)


def kernel_constants() -> tuple[Fraction, Fraction]:
    """``(int u^2 K(u) du, int K(u)^2 du)`` as exact rationals."""
    return MOMENT2, L2NORM


def _check_h(h):
    h = np.asarray(h, dtype=float)
    if np.any(~np.isfinite(h)) or np.any(h <= 0):
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    return h


def _region(t, h, lo, hi):
    """-1 left boundary, +1 right boundary, 0 interior.

    When both boundary zones overlap (``h > (hi - lo)/2``) the nearer
    boundary wins.
    """
    left = (t - lo < h) & (t - lo <= hi - t)
    right = (hi - t < h) & ~left
    return np.where(left, -1, np.where(right, 1, 0))


def smle_design(t, knots, h, support=None, boundary=False):
    """Offsets and matrix of the (corrected) smoothed CDF at points ``t``.

    ``h`` may be a scalar or one bandwidth per point.  With ``boundary`` on,
    the left zone uses ``sum p [K_h(t-x) - K_h(-t-x)]`` and the right zone
    ``1 - sum p [K_h(x-t) - K_h(x-2R+t)]`` (coordinates relative to ``lo``).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h = np.broadcast_to(_check_h(h), t.shape)[:, None]
    x = np.asarray(knots, dtype=float)[None, :]
    tc = t[:, None]
    plain = k_integrated((tc - x) / h)
    offset = np.zeros(t.size)
    if not boundary:
        return offset, plain
    if support is None:
        raise InvalidDatum("boundary correction needs a support interval")
    lo, hi = support
    if np.any(t < lo) or np.any(t > hi):
        raise InvalidDatum("evaluation point outside the support")
    region = _region(t, h[:, 0], lo, hi)
    tl, xl = tc - lo, x - lo
    R = hi - lo
    left = plain - k_integrated((-tl - xl) / h)
    right = -(k_integrated((xl - tl) / h) - k_integrated((xl - 2 * R + tl) / h))
    mat = np.where(region[:, None] == -1, left, np.where(region[:, None] == 1, right, plain))
    offset = np.where(region == 1, 1.0, 0.0)
    return offset, mat


def smooth_cdf(F: StepDistribution, t, h, support=None, boundary=False, isotonize=None):
    """Kernel-smoothed version of ``F``: ``int K((t-x)/h) dF(x)``.

    With ``boundary`` on, values are clipped to [0, 1] and, when ``t`` is an
    array, a running maximum removes any non-monotonicity at the zone seams
    (pass ``isotonize=False`` to keep pointwise values).
    """
    scalar = np.ndim(t) == 0
    offset, mat = smle_design(t, F.knots, h, support, boundary)
    vals = offset + mat @ F.jumps + (F.left_limit if not boundary else 0.0)
    if boundary:
        vals = np.clip(vals, 0.0, 1.0)
        if isotonize is None:
            isotonize = not scalar
        if isotonize:
            vals = np.maximum.accumulate(vals)
    return float(vals[0]) if scalar else vals


def density_design(t, points, h, support=None, boundary=False):
    """Matrix ``M`` with ``sum_j M[i, j] q_j = sum_j q_j K_h(t_i - x_j)`` (reflected)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    h = np.broadcast_to(_check_h(h), (t.shape[0],))[:, None]
    x = np.asarray(points, dtype=float)[None, :]
    mat = k_density((t - x) / h) / h
    if boundary:
        if support is None:
            raise InvalidDatum("boundary correction needs a support interval")
        lo, hi = support
        mat = mat + k_density((t + x - 2 * lo) / h) / h + k_density((2 * hi - t - x) / h) / h
    return mat


def smooth_density_of_g(times, t, h, support=None, boundary=False, weights=None):
    """Kernel density estimate of the inspection-time density, reflected at both ends."""
    times = np.asarray(times, dtype=float)
    w = np.ones(times.size) if weights is None else np.asarray(weights, dtype=float)
    scalar = np.ndim(t) == 0
    vals = density_design(t, times, h, support, boundary) @ w / w.sum()
    return float(vals[0]) if scalar else vals


def derivative_design(t, knots, h, support=None, boundary=False):
    """Matrix of ``h^-2 K'((t - x)/h)``, with mirrored jumps at ``-x`` and ``2R - x``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    h = np.broadcast_to(_check_h(h), (t.shape[0],))[:, None]
    x = np.asarray(knots, dtype=float)[None, :]
    mat = k_derivative((t - x) / h)
    if boundary:
        if support is None:
            raise InvalidDatum("boundary correction needs a support interval")
        lo, hi = support
        mat = mat + k_derivative((t + x - 2 * lo) / h) + k_derivative((t - 2 * hi + x) / h)
    return mat / h**2


def smooth_density_derivative(F: StepDistribution, t, h, support=None, boundary=False):
    """``h^-2 int K'((t - x)/h) dF(x)``, an estimate of the derivative of the density."""
    scalar = np.ndim(t) == 0
    vals = derivative_design(t, F.knots, h, support, boundary) @ F.jumps
    return float(vals[0]) if scalar else vals
