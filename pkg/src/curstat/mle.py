"""Nonparametric MLE for current status data and its bootstrap version.

The MLE is the vector of left slopes of the greatest convex minorant of the
diagram ``(sum_{j<=i} w_j, sum_{j<=i} w_j delta_j)``, with ``w`` the
multiplicities for the sample itself and the multinomial counts for a
bootstrap replicate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .data import BootstrapWeights, CurrentStatusSample, StepDistribution
from .errors import DegenerateDiagram, InvalidDatum
from .gcm import pava_rows, pava_sums


def group_values(w, s) -> np.ndarray:
    """MLE values at every distinct time for per-time weights ``w`` and status sums ``s``."""
    w = np.ascontiguousarray(w, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    out = np.empty(w.size)
    if pava_sums(s, w, out) == 0:
        raise DegenerateDiagram("all bootstrap weights are zero")
    return out


def group_values_rows(W, S) -> np.ndarray:
    """Row-wise :func:`group_values` for a stack of replicates."""
    return pava_rows(np.ascontiguousarray(S, dtype=float), np.ascontiguousarray(W, dtype=float))


def jump_sizes(values, w) -> np.ndarray:
    """Jumps of the step function that only charges positive-weight times.

    Works on 1-d or row-stacked 2-d input.  Leading zero-weight times sit left
    of the first observation of the (re)sample, where the MLE is zero.
    """
    values = np.asarray(values, dtype=float)
    seen = np.cumsum(np.asarray(w) > 0, axis=-1) > 0
    v = np.where(seen, values, 0.0)
    pad = np.zeros(v.shape[:-1] + (1,))
    return np.diff(np.concatenate((pad, v), axis=-1), axis=-1)


def step_from_values(times, values, w=None) -> StepDistribution:
    """Compress per-time values into a step function with knots at the jumps."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if w is None:
        w = np.ones(times.size)
    jumps = jump_sizes(values, w)
    keep = jumps != 0
    return StepDistribution(times[keep], np.cumsum(jumps)[keep])


def fit_mle(sample: CurrentStatusSample) -> StepDistribution:
    """Maximize the current status log likelihood over all distribution functions."""
    vals = group_values(sample.multiplicities, sample.statuses)
    return step_from_values(sample.times, vals)


def fit_bootstrap_mle(sample: CurrentStatusSample, weights: BootstrapWeights) -> StepDistribution:
    """MLE of the resample encoded by per-record multinomial ``weights``."""
    counts = np.asarray(weights.counts)
    if counts.size != sample.n:
        raise InvalidDatum(f"expected {sample.n} weights, got {counts.size}")
    if np.any(counts < 0):
        raise InvalidDatum("bootstrap weights must be nonnegative")
    w, s = sample.group_sums(counts)
    vals = group_values(w, s)
    return step_from_values(sample.times, vals, w)


def log_likelihood(sample: CurrentStatusSample, F) -> float:
    """Normalized log likelihood of ``F`` (a callable or per-time values)."""
    vals = np.asarray(F(sample.times) if callable(F) else F, dtype=float)
    s = sample.statuses
    f = sample.multiplicities - s
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(s > 0, s * np.log(vals), 0.0)
        b = np.where(f > 0, f * np.log1p(-vals), 0.0)
    return float((a + b).sum() / sample.n)


@dataclass(frozen=True)
class SwitchProcesses:
    """Processes ``V_n``, ``G_n`` and the argmin process ``U_n``.

    ``times`` are the inspection times carrying positive weight; ``V`` and
    ``G`` are the normalized cumulative status and weight sums at those times.
    """

    times: np.ndarray
    weights: np.ndarray
    status_sums: np.ndarray
    n: int

    @property
    def Vn(self) -> StepDistribution:
        return StepDistribution(self.times, np.cumsum(self.status_sums) / self.n)

    @property
    def Gn(self) -> StepDistribution:
        return StepDistribution(self.times, np.cumsum(self.weights) / self.n)

    def U(self, a: float) -> float:
        """Smallest minimizer of ``V_n(t-) - a G_n(t-)`` over ``{0}`` and the times.

        With left limits the switch relation ``F_n(t) >= a  <=>  U(a) <= t``
        holds exactly for right-continuous ``F_n`` at every ``t >= T_(1)``.
        Returns ``inf`` when ``F_n`` never reaches ``a``.
        """
        path = np.concatenate(([0.0], np.cumsum(self.status_sums - a * self.weights))) / self.n
        candidates = np.concatenate(([0.0], path))
        # ties up to rounding go to the earliest minimizer
        j = int(np.argmax(candidates <= candidates.min() + 1e-13))
        if j == 0:
            return 0.0
        if j > self.times.size:
            return float("inf")
        return float(self.times[j - 1])


def switch_processes(sample: CurrentStatusSample, weights: BootstrapWeights | None = None
                     ) -> SwitchProcesses:
    if weights is None:
        w, s = sample.multiplicities.astype(float), sample.statuses.astype(float)
    else:
        w, s = sample.group_sums(np.asarray(weights.counts))
        w, s = w.astype(float), s.astype(float)
    keep = w > 0
    return SwitchProcesses(sample.times[keep], w[keep], s[keep], int(round(w.sum())))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def l2_distance(F: StepDistribution, F0, interval, p: int = 2) -> float:
    """``(int_lo^hi |F - F0|^p dt)^(1/p)``, integrating panel by panel between knots.

    ``F0`` must accept arrays when ``p=2``; each panel then uses an 8-point
    Gauss-Legendre rule, exact for polynomial ``F0`` of degree up to 7.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise InvalidDatum("interval must satisfy lo < hi")
    if p not in (1, 2):
        raise InvalidDatum("p must be 1 or 2")
    inner = F.knots[(F.knots > lo) & (F.knots < hi)]
    edges = np.concatenate(([lo], inner, [hi]))
    if p == 2:
        # the integrand is smooth on each panel, so a fixed rule is enough
        a, b = edges[:-1], edges[1:]
        mid, half = (a + b) / 2, (b - a) / 2
        tt = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        c = F(a)[:, None]
        total = float(np.sum(half * (((c - F0(tt)) ** 2) @ _GL_WEIGHTS)))
        return total ** 0.5
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        c = F(a)
        val, _ = integrate.quad(lambda t: abs(c - F0(t)), a, b, epsabs=1e-9, limit=200)
        total += val
    return total ** (1.0 / p)
