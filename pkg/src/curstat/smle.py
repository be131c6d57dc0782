"""Smoothed MLE, its convolution variant, variance building blocks and asymptotics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BootstrapWeights, CurrentStatusSample, StepDistribution
from .errors import InvalidDatum, SingularDesign
from .kernel import L2NORM, MOMENT2, _check_h, k_density, k_integrated, smooth_cdf

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SmleEstimate:
    value: float
    bandwidth: float
    boundary: bool
    mle: StepDistribution


@dataclass(frozen=True)
class AsymptoticMoments:
    """Limit ``N(bias_factor, variance)`` of ``n^(2/5)(F_nh(t) - F_0(t))`` for ``h = c n^(-1/5)``."""

    bias_factor: float
    variance: float
    c: float


def smle(F_n: StepDistribution, t, h, support=None, boundary=False):
    return smooth_cdf(F_n, t, h, support=support, boundary=boundary)


def convolution_smle(F_n: StepDistribution, t, h, support=None):
    """``int K_h(t - u) dF_nh(u)`` for the uncorrected SMLE ``F_nh``.

    Each jump contributes ``int K_h(t-u) K_h(u-x) du``; the integrand is a
    polynomial between the breakpoints ``t -+ h`` and ``x -+ h``, so 8-point
    Gauss-Legendre per panel is exact.
    """
    h = float(_check_h(h))
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    x = F_n.knots
    p = F_n.jumps
    out = np.empty(tt.size)
    for i, ti in enumerate(tt):
        a, b = ti - h, ti + h
        cuts = np.sort(np.clip(np.stack([x - h, x + h], axis=1), a, b), axis=1)
        edges = np.concatenate([np.full((x.size, 1), a), cuts, np.full((x.size, 1), b)], axis=1)
        lo, hi = edges[:, :-1], edges[:, 1:]
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        u = mid[..., None] + half[..., None] * _GL_NODES
        integrand = k_integrated((ti - u) / h) * k_density((u - x[:, None, None]) / h) / h
        middle = (half[..., None] * _GL_WEIGHTS * integrand).sum(axis=(1, 2))
        below = k_integrated((a - x) / h)
        out[i] = F_n.left_limit + p @ (below + middle)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def s_nh_variance(sample: CurrentStatusSample, F, t, h,
                  weights: BootstrapWeights | None = None):
    """``n^-2 sum M_i K_h(t - T_i)^2 (Delta_i - F(T_i))^2``.

    ``F`` is a step function (or per-time values) evaluated at the inspection
    times; without ``weights`` every ``M_i`` is one.
    """
    h = _check_h(h)
    if weights is None:
        w, s = sample.multiplicities, sample.statuses
    else:
        w, s = sample.group_sums(np.asarray(weights.counts))
    Fv = np.asarray(F(sample.times) if callable(F) else F, dtype=float)
    resid = s * (1.0 - Fv) ** 2 + (w - s) * Fv**2
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    hh = np.broadcast_to(h, (tt.shape[0],))[:, None]
    kern = (k_density((tt - sample.times[None, :]) / hh) / hh) ** 2
    vals = kern @ resid / sample.n**2
    return float(vals[0]) if scalar else vals


def asymptotic_moments(model, t: float, c: float) -> AsymptoticMoments:
    """Plug the model's ``f_0'``, ``F_0`` and ``g`` into the SMLE limit moments."""
    if c <= 0:
        raise InvalidDatum("c must be positive")
    g = float(model.g(t))
    if g <= 0:
        raise SingularDesign(f"observation density vanishes at t={t}", t)
    F0 = float(model.F0(t))
    beta = c**2 * float(model.f0_prime(t)) / 2 * float(MOMENT2)
    sigma2 = F0 * (1 - F0) / (c * g) * float(L2NORM)
    return AsymptoticMoments(beta, sigma2, c)
