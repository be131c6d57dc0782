"""Current status linear regression ``Y = beta X + eps`` with ``Delta = 1{Y <= T}``.

For fixed ``beta`` the error distribution is estimated by the current status
MLE on the residuals ``u = T - beta X``.  The simple score estimator is a
zero crossing of the truncated score

    psi(beta) = sum_{F(u_i) in [eps, 1-eps]} w_i X_i (Delta_i - F(u_i)),

which is piecewise constant in ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np
from numba import njit
from scipy.stats import norm

from ._parallel import chunks, pmap
from .data import BootstrapWeights, RngSpec, StepDistribution, _read_rows
from .errors import EmptySample, InvalidDatum, SingularDesign, UnstableFit
from .gcm import pava_sums
from .kernel import k_density
from .mle import group_values, step_from_values

DEFAULT_EPS = 0.001
GRID_SIZE = 401
PILOT_SIZE = 41


@dataclass(frozen=True, eq=False)
class RegressionSample:
    times: np.ndarray
    covariates: np.ndarray
    statuses: np.ndarray
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.covariates, dtype=float)
        d = np.asarray(self.statuses)
        if t.ndim != 1 or t.shape != x.shape or t.shape != d.shape:
            raise InvalidDatum("times, covariates and statuses must be 1-d of equal length")
        if t.size == 0:
            raise EmptySample("regression sample is empty")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise InvalidDatum("non-finite time or covariate")
        if not np.all((d == 0) | (d == 1)):
            raise InvalidDatum("statuses must be 0 or 1")
        if not 0 < self.eps < 0.5:
            raise InvalidDatum("truncation eps must lie in (0, 1/2)")
        for name, arr in (("times", t), ("covariates", x), ("statuses", d.astype(float))):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.times.size

    def residuals(self, beta: float) -> np.ndarray:
        return self.times - beta * self.covariates


@dataclass(frozen=True, eq=False)
class ScoreFit:
    beta_hat: float
    score: float
    bracket: tuple[float, float]
    no_crossing: bool
    profile: StepDistribution | None = None


# --------------------------------------------------------------------------
# compiled score kernel


@njit(cache=True, nogil=True)
def _score_kernel(T, X, D, W, beta, eps):
    """Truncated score and size of the truncation set at ``beta``."""
    n = T.size
    u = T - beta * X
    order = np.argsort(u, kind="mergesort")
    gw = np.zeros(n)
    gs = np.zeros(n)
    gid = np.empty(n, dtype=np.int64)
    k = -1
    last = 0.0
    for j in range(n):
        i = order[j]
        if k < 0 or u[i] != last:
            k += 1
            last = u[i]
        gid[i] = k
        gw[k] += W[i]
        gs[k] += W[i] * D[i]
    k += 1
    vals = np.empty(k)
    if pava_sums(gs[:k], gw[:k], vals) == 0:
        return 0.0, 0
    total = 0.0
    used = 0
    for i in range(n):
        if W[i] == 0.0:
            continue
        F = vals[gid[i]]
        if F >= eps and F <= 1.0 - eps:
            total += W[i] * X[i] * (D[i] - F)
            used += 1
    return total, used


@njit(cache=True, nogil=True)
def _score_grid(T, X, D, W, betas, eps):
    m = betas.size
    out = np.empty(m)
    used = np.empty(m, dtype=np.int64)
    for j in range(m):
        out[j], used[j] = _score_kernel(T, X, D, W, betas[j], eps)
    return out, used


@njit(cache=True, nogil=True)
def _sign(value, used):
    if used == 0:
        return 0
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


@njit(cache=True, nogil=True)
def _sign_at(T, X, D, W, beta, eps):
    v, u = _score_kernel(T, X, D, W, beta, eps)
    return _sign(v, u)


@njit(cache=True, nogil=True)
def _edge(T, X, D, W, a, b, target, eps, tol):
    """Bisect between ``a`` (sign ``target``) and ``b`` for where the sign changes.

    ``b`` may lie on either side of ``a``; the returned ``a`` keeps the sign.
    """
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        if _sign_at(T, X, D, W, mid, eps) == target:
            a = mid
        else:
            b = mid
    return a, b


@njit(cache=True, nogil=True)
def _zero_crossing(T, X, D, W, lo, hi, size, eps):
    """Return ``(beta, score, bracket_lo, bracket_hi, crossed)``.

    A crossing is a sign change between consecutive grid points with a
    nonzero score.  Both ends of the cell are refined by bisection; any gap
    in between where the score vanishes (including an empty truncation set)
    is part of the crossing and the estimate is the middle of it.
    """
    betas = np.linspace(lo, hi, size)
    vals, used = _score_grid(T, X, D, W, betas, eps)
    tol = 1e-6 * (hi - lo)
    for j in range(size):
        if used[j] > 0 and vals[j] == 0.0:
            return betas[j], 0.0, betas[j], betas[j], True
    best_b, best_s, best_lo, best_hi = np.nan, np.inf, np.nan, np.nan
    prev = -1
    for j in range(size):
        sj = _sign(vals[j], used[j])
        if sj == 0:
            continue
        if prev >= 0:
            sp = _sign(vals[prev], used[prev])
            if sp != sj:
                left, _ = _edge(T, X, D, W, betas[prev], betas[j], sp, eps, tol)
                right, _ = _edge(T, X, D, W, betas[j], left, sj, eps, tol)
                mid = 0.5 * (left + right)
                v, u = _score_kernel(T, X, D, W, mid, eps)
                if abs(v) < best_s:
                    best_b, best_s, best_lo, best_hi = mid, abs(v), left, right
        prev = j
    if np.isfinite(best_s):
        return best_b, _score_kernel(T, X, D, W, best_b, eps)[0], best_lo, best_hi, True
    best_j = -1
    for j in range(size):
        if used[j] > 0 and (best_j < 0 or abs(vals[j]) < abs(vals[best_j])):
            best_j = j
    if best_j < 0:
        best_j = 0
    return betas[best_j], vals[best_j], betas[best_j], betas[best_j], False


# --------------------------------------------------------------------------
# public operations


def _weights(sample, weights):
    if weights is None:
        return np.ones(sample.n)
    counts = np.asarray(weights.counts if isinstance(weights, BootstrapWeights) else weights,
                        dtype=float)
    if counts.shape != (sample.n,):
        raise InvalidDatum(f"expected {sample.n} weights, got {counts.size}")
    if np.any(counts < 0):
        raise InvalidDatum("weights must be nonnegative")
    return counts


def profile_mle(sample: RegressionSample, beta: float, weights=None) -> StepDistribution:
    """Current status MLE of the error distribution at residuals ``T - beta X``."""
    w = _weights(sample, weights)
    keep = w > 0
    if not keep.any():
        raise InvalidDatum("all weights are zero")
    u = sample.residuals(beta)[keep]
    knots, inv = np.unique(u, return_inverse=True)
    gw = np.bincount(inv, weights=w[keep])
    gs = np.bincount(inv, weights=w[keep] * sample.statuses[keep])
    return step_from_values(knots, group_values(gw, gs))


def score(sample: RegressionSample, beta: float, weights=None) -> tuple[float, bool]:
    """Truncated score at ``beta`` and whether the truncation set was empty."""
    w = _weights(sample, weights)
    val, used = _score_kernel(sample.times, sample.covariates, sample.statuses, w, float(beta),
                              sample.eps)
    return float(val), used == 0


def pilot_interval(sample, search, weights=None, size=PILOT_SIZE, half_width=2.0):
    """Centre a search window on a coarse-grid zero crossing of the score."""
    lo, hi = map(float, search)
    b = _zero_crossing(sample.times, sample.covariates, sample.statuses,
                       _weights(sample, weights), lo, hi, int(size), sample.eps)[0]
    return b - half_width, b + half_width


def sse_estimate(sample: RegressionSample, search=None, grid_size=GRID_SIZE, weights=None,
                 with_profile=True) -> ScoreFit:
    """Simple score estimator: a zero crossing of the truncated score over ``search``.

    With ``search=None`` a 41-point pilot scan over ``[-10, 10]`` fixes the
    window ``[pilot - 2, pilot + 2]``.
    """
    if grid_size < 2:
        raise InvalidDatum("score grid needs at least two points")
    if search is None:
        search = pilot_interval(sample, (-10.0, 10.0), weights)
    lo, hi = map(float, search)
    if not lo < hi:
        raise InvalidDatum("search interval must satisfy lo < hi")
    w = _weights(sample, weights)
    b, s, a, c, crossed = _zero_crossing(sample.times, sample.covariates, sample.statuses, w,
                                         lo, hi, int(grid_size), sample.eps)
    prof = profile_mle(sample, b, weights) if with_profile else None
    return ScoreFit(float(b), float(s), (float(a), float(c)), not crossed, prof)


@dataclass(frozen=True)
class BootstrapInterval:
    lower: float
    upper: float
    beta_hat: float
    no_crossing: int
    B: int
    replicates: np.ndarray
    kind: str = "basic"


def _boot_chunk(sample, rng, lo, hi, grid_size, block):
    out = np.empty(len(block))
    flag = np.zeros(len(block), dtype=bool)
    for j, b in enumerate(block):
        gen = rng.generator(b)
        w = np.bincount(gen.integers(0, sample.n, sample.n), minlength=sample.n).astype(float)
        beta, _, _, _, crossed = _zero_crossing(sample.times, sample.covariates, sample.statuses,
                                                w, lo, hi, grid_size, sample.eps)
        out[j], flag[j] = beta, not crossed
    return out, flag


def bootstrap_sse_ci(sample: RegressionSample, search=None, B=1000, alpha=0.05, rng=None,
                     grid_size=GRID_SIZE, workers=1, fit: ScoreFit | None = None,
                     interval="basic") -> BootstrapInterval:
    """Bootstrap interval from ``B`` multinomial-weight refits of the score estimator.

    With ``q_lo, q_hi`` the order statistics ``ceil(alpha B / 2)`` and
    ``ceil((1 - alpha/2) B)`` of the replicates, ``interval="basic"`` gives
    ``[2 beta_hat - q_hi, 2 beta_hat - q_lo]`` and ``"percentile"`` gives
    ``[q_lo, q_hi]``.  Replicates use the same search window as the original
    fit; those without a sign change are excluded and counted.
    """
    if interval not in ("basic", "percentile"):
        raise InvalidDatum(f"unknown interval type {interval!r}")
    if B < 2:
        raise InvalidDatum("need at least B=2 bootstrap replicates")
    if not 0 < alpha < 1:
        raise InvalidDatum("alpha must lie in (0, 1)")
    rng = rng if rng is not None else RngSpec(0)
    if search is None:
        search = pilot_interval(sample, (-10.0, 10.0))
    lo, hi = map(float, search)
    fit = fit if fit is not None else sse_estimate(sample, (lo, hi), grid_size, with_profile=False)
    parts = pmap(partial(_boot_chunk, sample, rng, lo, hi, int(grid_size)), chunks(B), workers)
    betas = np.concatenate([p[0] for p in parts])
    flags = np.concatenate([p[1] for p in parts])
    bad = int(flags.sum())
    if bad > B / 2:
        raise UnstableFit(f"{bad} of {B} bootstrap replicates had no score crossing")
    good = np.sort(betas[~flags])
    k_lo = max(math.ceil(alpha / 2 * good.size - 1e-9), 1)
    k_hi = min(math.ceil((1 - alpha / 2) * good.size - 1e-9), good.size)
    q_lo, q_hi = float(good[k_lo - 1]), float(good[k_hi - 1])
    if interval == "basic":
        q_lo, q_hi = 2 * fit.beta_hat - q_hi, 2 * fit.beta_hat - q_lo
    return BootstrapInterval(q_lo, q_hi, fit.beta_hat, bad, B, betas, interval)


def _rule_of_thumb(spread, n):
    """Triweight rule-of-thumb bandwidth (normal reference)."""
    return 3.15 * (spread if spread > 0 else 1.0) * n**-0.2


def _robust_spread(x):
    q75, q25 = np.percentile(x, [75, 25])
    sd = np.std(x, ddof=1) if x.size > 1 else 0.0
    iqr = (q75 - q25) / 1.349
    return min(sd, iqr) if iqr > 0 else sd


@dataclass(frozen=True)
class WaldResult:
    V: float
    W: float
    variance: float
    lower: float
    upper: float


def wald_variance(sample: RegressionSample, beta_hat: float, alpha=0.05, h_x=None, h_f=None
                  ) -> WaldResult:
    """Plug-in sandwich variance ``W / V^2`` and the Wald interval for ``beta``.

    ``E(X | u)`` is a triweight Nadaraya-Watson regression on the residuals
    and ``f_0`` a triweight smoothing of the profile MLE's jumps; both
    truncated to ``F(u) in [eps, 1-eps]``.  Default bandwidths are normal
    reference rules scaled by the spread of the residuals and of the fitted
    error distribution respectively.
    """
    n = sample.n
    u = sample.residuals(beta_hat)
    prof = profile_mle(sample, beta_hat)
    F = prof(u)
    if h_x is None:
        h_x = _rule_of_thumb(_robust_spread(u), n)
    if h_f is None:
        # spread of the fitted error distribution, not of the residuals
        mean = prof.jumps @ prof.knots
        h_f = _rule_of_thumb(math.sqrt(max(prof.jumps @ (prof.knots - mean) ** 2, 0.0)), n)
    kx = k_density((u[:, None] - u[None, :]) / h_x)
    den = kx.sum(axis=1)
    phi = kx @ sample.covariates / den
    f0 = k_density((u[:, None] - prof.knots[None, :]) / h_f) @ prof.jumps / h_f
    keep = (F >= sample.eps) & (F <= 1 - sample.eps)
    r2 = (sample.covariates - phi) ** 2
    V = float(np.sum(f0[keep] * r2[keep]) / n)
    W = float(np.sum((F * (1 - F))[keep] * r2[keep]) / n)
    if V < 1e-8:
        raise SingularDesign(f"estimated V={V:.3g} is too small")
    var = W / V**2
    half = norm.ppf(1 - alpha / 2) * math.sqrt(var / n)
    return WaldResult(V, W, var, beta_hat - half, beta_hat + half)


def read_regression_csv(source, eps=DEFAULT_EPS) -> RegressionSample:
    """Read columns ``time,covariate,status``."""
    rows = _read_rows(source, ("time", "covariate", "status"))
    t = np.array([r["time"] for r in rows], dtype=float)
    x = np.array([r["covariate"] for r in rows], dtype=float)
    d = np.array([r["status"] for r in rows], dtype=int)
    return RegressionSample(t, x, d, eps)


def write_regression_csv(sample: RegressionSample, path) -> None:
    lines = ["time,covariate,status"]
    lines += [f"{t:.17g},{x:.17g},{int(d)}" for t, x, d in
              zip(sample.times, sample.covariates, sample.statuses)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
