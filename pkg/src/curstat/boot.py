"""Bootstrap confidence intervals for the distribution function.

Methods
-------
studentized
    Nonparametric (multinomial-weight) bootstrap of the Studentized SMLE.
wald1, wald2, wald3
    Normal-quantile intervals with a plug-in, toy-estimator or bootstrap
    variance estimate.
senxu
    Smooth bootstrap around the MLE: inspection times fixed, statuses redrawn
    from the SMLE.
smooth_smle
    Smooth bootstrap of the Studentized SMLE, centred at the convolution SMLE.

Bandwidths are either fixed or chosen per grid point by m-out-of-n
subsampling of the pointwise MSE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np
from scipy.stats import norm

from ._parallel import chunks, pmap
from .data import CurrentStatusSample, Grid, RngSpec, draw_multinomial_weights
from .errors import DegenerateWindow, InvalidDatum, InvalidSubsample, SingularDesign
from .kernel import L2NORM, MOMENT2, derivative_design, k_density, smle_design, smooth_density_of_g
from .mle import group_values, group_values_rows, jump_sizes, step_from_values
from .smle import convolution_smle

METHODS = ("studentized", "wald1", "wald2", "wald3", "senxu", "smooth_smle")
BIAS_RULES = ("none", "true_beta", "direct", "subsample")
MIN_BOOT_VARIANCE = 1e-12
TABLED_SUBSAMPLE_SIZES = {1000: 50, 5000: 100, 10000: 250}


@dataclass(frozen=True)
class BandwidthRule:
    """How the SMLE bandwidth is chosen at each grid point.

    ``kind="fixed"`` uses ``h`` everywhere.  ``kind="auto"`` selects
    ``c_opt(t)`` by subsampling and uses ``factor * c_opt * n**-exponent``;
    ``exponent=1/4`` or ``factor=1/3`` give the two undersmoothing rules.
    """

    kind: str = "fixed"
    h: float | None = None
    c_grid: tuple[float, ...] | None = None
    m: int | None = None
    B_sub: int = 500
    exponent: float = 0.2
    factor: float = 1.0
    c0: float | None = None
    replace: bool = False

    def __post_init__(self):
        if self.kind not in ("fixed", "auto"):
            raise InvalidDatum(f"unknown bandwidth rule {self.kind!r}")
        if self.kind == "fixed" and (self.h is None or self.h <= 0):
            raise InvalidDatum("fixed bandwidth rule needs h > 0")
        if self.factor <= 0 or self.exponent <= 0 or self.B_sub < 1:
            raise InvalidDatum("bandwidth rule needs positive factor, exponent and B_sub")

    @classmethod
    def fixed(cls, h: float) -> BandwidthRule:
        return cls(kind="fixed", h=float(h))

    @classmethod
    def auto(cls, **kw) -> BandwidthRule:
        return cls(kind="auto", **kw)

    def describe(self) -> str:
        if self.kind == "fixed":
            return f"fixed(h={self.h:.6g})"
        return f"auto(exponent={self.exponent:.6g},factor={self.factor:.6g},B_sub={self.B_sub})"


@dataclass(frozen=True)
class CiRequest:
    grid: Grid
    alpha: float = 0.05
    B: int = 1000
    bandwidth: BandwidthRule = field(default_factory=lambda: BandwidthRule.fixed(1.0))
    method: str = "studentized"
    bias_rule: str = "none"
    model: object = None
    boundary: bool = True
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidDatum("alpha must lie in (0, 1)")
        if self.B < 2:
            raise InvalidDatum("need at least B=2 bootstrap replicates")
        if self.method not in METHODS:
            raise InvalidDatum(f"unknown method {self.method!r}")
        if self.bias_rule not in BIAS_RULES:
            raise InvalidDatum(f"unknown bias rule {self.bias_rule!r}")
        if self.bias_rule == "true_beta" and self.model is None:
            raise InvalidDatum("bias_rule='true_beta' needs a model")


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    t: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    bandwidth: np.ndarray
    discarded: np.ndarray
    seed: int
    B: int
    method: str

    @property
    def length(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def degenerate(self) -> np.ndarray:
        return self.upper == self.lower

    def covers(self, truth) -> np.ndarray:
        truth = np.asarray(truth, dtype=float)
        return (self.lower <= truth) & (truth <= self.upper)

    def to_csv(self, path=None, header: dict | None = None) -> str:
        lines = [f"# {k}={v}" for k, v in (header or {}).items()]
        lines.append("t,estimate,lower,upper,bandwidth,discarded")
        for row in zip(self.t, self.estimate, self.lower, self.upper, self.bandwidth, self.discarded):
            lines.append(",".join(f"{v:.10g}" for v in row[:5]) + f",{int(row[5])}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


@dataclass(frozen=True)
class BandwidthSelection:
    c_opt: np.ndarray
    mse: np.ndarray
    degenerate: np.ndarray


# --------------------------------------------------------------------------
# defaults


def default_c_grid(support) -> tuple[float, ...]:
    half = (support[1] - support[0]) / 2
    return tuple(0.25 * k * half for k in range(1, 17))


def default_subsample_size(n: int) -> int:
    if n in TABLED_SUBSAMPLE_SIZES:
        return TABLED_SUBSAMPLE_SIZES[n]
    m = max(50, round(n**0.6))
    return m if m < n else max(1, n // 2)


def undersmoothed_bandwidth(c_opt: float, n: int, rule: str = "n^-1/4") -> float:
    """``c n^(-1/4)`` or ``(1/3) c n^(-1/5)``."""
    if c_opt <= 0:
        raise InvalidDatum("c_opt must be positive")
    if rule in ("n^-1/4", "quarter"):
        return c_opt * n**-0.25
    if rule in ("(1/3)n^-1/5", "third"):
        return c_opt / 3 * n**-0.2
    raise InvalidDatum(f"unknown undersmoothing rule {rule!r}")


def order_statistic_quantile(values: np.ndarray, q: float) -> float:
    """The ``ceil(q B)``-th smallest of ``B`` values."""
    x = np.sort(np.asarray(values, dtype=float))
    k = min(max(math.ceil(q * x.size - 1e-9), 1), x.size)
    return float(x[k - 1])


# --------------------------------------------------------------------------
# replicate engines


def _np_chunk(sample, rng, A, offset, Kh2, clip, block):
    """Multinomial-weight replicates ``block``: SMLE values and S* at the grid."""
    counts = np.stack([draw_multinomial_weights(sample.n, rng, b).counts for b in block])
    W, S = sample.group_sums(counts)
    V = group_values_rows(W, S)
    P = jump_sizes(V, W)
    Fstar = offset + P @ A.T
    if clip:
        Fstar = np.clip(Fstar, 0.0, 1.0)
    resid = S * (1.0 - V) ** 2 + (W - S) * V**2
    Sstar = resid @ Kh2.T / sample.n**2
    return Fstar, Sstar


def _smooth_chunk(sample, rng, probs, A, offset, Kh2, clip, t_index, block):
    """Bernoulli replicates: statuses redrawn from ``probs`` with times fixed."""
    W = sample.multiplicities.astype(float)
    starts = np.concatenate(([0], np.cumsum(sample.multiplicities)[:-1]))
    p_exp = probs[sample.group_index]
    draws = np.stack([rng.generator(b).random(sample.n) < p_exp for b in block]).astype(float)
    S = np.add.reduceat(draws, starts, axis=1)
    Wr = np.broadcast_to(W, S.shape)
    V = group_values_rows(Wr, S)
    P = jump_sizes(V, Wr)
    Fstar = offset + P @ A.T
    if clip:
        Fstar = np.clip(Fstar, 0.0, 1.0)
    resid = S * (1.0 - V) ** 2 + (Wr - S) * V**2
    Sstar = resid @ Kh2.T / sample.n**2
    mle_at_t = np.where(t_index >= 0, V[:, np.clip(t_index, 0, None)], 0.0)
    return Fstar, Sstar, mle_at_t


def _run_chunks(fn, B, workers):
    parts = pmap(fn, chunks(B), workers)
    return tuple(np.concatenate(arrs, axis=0) for arrs in zip(*parts))


def nonparametric_replicates(sample, t, h, rng: RngSpec, B, support=None, boundary=True,
                             workers=1):
    """``(F*_nh(t), S*_nh(t))`` for ``B`` multinomial-weight replicates, shape ``(B, len(t))``."""
    offset, A = smle_design(t, sample.times, h, support, boundary)
    Kh2 = _kernel_sq(t, sample.times, h)
    fn = partial(_np_chunk, sample, rng, A, offset, Kh2, boundary)
    return _run_chunks(fn, B, workers)


def smooth_replicates(sample, t, h, probs, rng: RngSpec, B, support=None, boundary=True,
                      workers=1):
    """Smooth-bootstrap ``(F*_nh(t), S*_nh(t), F*_n(t))`` with statuses ~ Bernoulli(``probs``)."""
    offset, A = smle_design(t, sample.times, h, support, boundary)
    Kh2 = _kernel_sq(t, sample.times, h)
    t_index = np.searchsorted(sample.times, np.atleast_1d(t), side="right") - 1
    fn = partial(_smooth_chunk, sample, rng, np.asarray(probs, dtype=float), A, offset, Kh2,
                 boundary, t_index)
    return _run_chunks(fn, B, workers)


def _kernel_sq(t, times, h):
    tt = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    hh = np.broadcast_to(np.asarray(h, dtype=float), (tt.shape[0],))[:, None]
    return (k_density((tt - times[None, :]) / hh) / hh) ** 2


def studentized_limits(estimate, S, Fstar, Sstar, center, alpha, t):
    """Invert the Studentized pivot; returns ``(lower, upper, discarded)``."""
    m = np.size(estimate)
    lower, upper = np.empty(m), np.empty(m)
    discarded = np.zeros(m, dtype=np.int64)
    for i in range(m):
        ok = Sstar[:, i] >= MIN_BOOT_VARIANCE
        discarded[i] = int((~ok).sum())
        if not ok.any():
            raise DegenerateWindow(float(t[i]))
        piv = (Fstar[ok, i] - center[i]) / np.sqrt(Sstar[ok, i])
        q_lo = order_statistic_quantile(piv, alpha / 2)
        q_hi = order_statistic_quantile(piv, 1 - alpha / 2)
        sd = math.sqrt(S[i])
        lower[i] = estimate[i] - q_hi * sd
        upper[i] = estimate[i] - q_lo * sd
    return lower, upper, discarded


# --------------------------------------------------------------------------
# subsampling: bandwidth selection and bias


def _subsample_fits(sample, m, B_sub, rng: RngSpec, replace_draws=False):
    """Per-time weights and jump sizes of ``B_sub`` size-``m`` subsample MLEs."""
    n = sample.n
    if m >= n and not replace_draws:
        raise InvalidSubsample(f"subsample size m={m} must be smaller than n={n}")
    if m < 1:
        raise InvalidSubsample("subsample size must be positive")
    counts = np.empty((B_sub, n), dtype=np.int64)
    for b in range(B_sub):
        idx = rng.generator(b).choice(n, size=m, replace=replace_draws)
        counts[b] = np.bincount(idx, minlength=n)
    W, S = sample.group_sums(counts)
    V = group_values_rows(W, S)
    return W, jump_sizes(V, W)


def _subsample_curves(sample, t, c_grid, m, B_sub, rng, design, exponent, replace_draws):
    """Subsample estimates, shape ``(B_sub, len(t), len(c_grid))``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = np.asarray(c_grid, dtype=float)
    _, P = _subsample_fits(sample, m, B_sub, rng, replace_draws)
    tt = np.repeat(t, c.size)
    hh = np.tile(c * m**-exponent, t.size)
    offset, A = design(tt, hh)
    vals = offset + P @ A.T
    return vals.reshape(B_sub, t.size, c.size)


def _smle_design_fn(sample, support, boundary):
    def design(t, h):
        offset, A = smle_design(t, sample.times, h, support, boundary)
        return offset, A
    return design


def _smle_values(sample, t, h, support, boundary, values=None):
    if values is None:
        values = group_values(sample.multiplicities, sample.statuses)
    offset, A = smle_design(t, sample.times, h, support, boundary)
    out = offset + A @ jump_sizes(values, sample.multiplicities)
    return np.clip(out, 0.0, 1.0) if boundary else out


def _resolve_subsampling(sample, support, c_grid, m, c0):
    support = support if support is not None else sample.support_or_range()
    c_grid = tuple(sorted(c_grid)) if c_grid is not None else default_c_grid(support)
    if len(c_grid) == 0:
        raise InvalidDatum("c_grid is empty")
    m = default_subsample_size(sample.n) if m is None else int(m)
    c0 = float(c0) if c0 is not None else support[1] - support[0]
    if c0 <= 0 or min(c_grid) <= 0:
        raise InvalidDatum("bandwidth constants must be positive")
    return support, c_grid, m, c0


def _argmin_mse(curves, pilot, c_grid):
    mse = ((curves - pilot[None, :, None]) ** 2).mean(axis=0)
    best = np.argmin(mse, axis=1)
    flat = np.all(np.ptp(curves, axis=2) == 0, axis=0)
    best = np.where(flat, 0, best)
    return BandwidthSelection(np.asarray(c_grid)[best], mse, flat)


def select_bandwidth(sample, t, c_grid=None, m=None, B_sub=500, c0=None, rng=None, *,
                     support=None, boundary=True, replace=False) -> BandwidthSelection:
    """Choose ``c`` in ``h = c n^(-1/5)`` by subsampling the pointwise MSE.

    The MSE at ``c`` compares size-``m`` subsample SMLEs with bandwidth
    ``c m^(-1/5)`` to the full-sample SMLE with pilot bandwidth ``c0 n^(-1/5)``.
    Ties go to the smallest ``c``; if the subsample SMLEs do not depend on
    ``c`` at all the point is flagged ``degenerate``.
    """
    rng = rng if rng is not None else RngSpec(0)
    support, c_grid, m, c0 = _resolve_subsampling(sample, support, c_grid, m, c0)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pilot = _smle_values(sample, t, c0 * sample.n**-0.2, support, boundary)
    curves = _subsample_curves(sample, t, c_grid, m, B_sub, rng,
                               _smle_design_fn(sample, support, boundary), 0.2, replace)
    if boundary:
        curves = np.clip(curves, 0.0, 1.0)
    return _argmin_mse(curves, pilot, c_grid)


def select_derivative_bandwidth(sample, t, c_grid=None, m=None, B_sub=500, c0=None, rng=None,
                                *, support=None, boundary=True, replace=False
                                ) -> BandwidthSelection:
    """Same subsampling MSE criterion for the density-derivative bandwidth ``c n^(-1/9)``."""
    rng = rng if rng is not None else RngSpec(0)
    support, c_grid, m, c0 = _resolve_subsampling(sample, support, c_grid, m, c0)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    values = group_values(sample.multiplicities, sample.statuses)
    p = jump_sizes(values, sample.multiplicities)
    pilot = derivative_design(t, sample.times, c0 * sample.n ** (-1 / 9), support, boundary) @ p

    def design(tt, hh):
        return np.zeros(tt.size), derivative_design(tt, sample.times, hh, support, boundary)

    curves = _subsample_curves(sample, t, c_grid, m, B_sub, rng, design, 1 / 9, replace)
    return _argmin_mse(curves, pilot, c_grid)


def bias_subsample_estimate(sample, t, c_opt, m=None, B_sub=500, c0=None, rng=None, *,
                            support=None, boundary=True, replace=False):
    """Subsampling estimate of the actual SMLE bias ``beta(t) n^(-2/5)``."""
    rng = rng if rng is not None else RngSpec(0)
    support, _, m, c0 = _resolve_subsampling(sample, support, None, m, c0)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c_opt = np.broadcast_to(np.asarray(c_opt, dtype=float), t.shape)
    pilot = _smle_values(sample, t, c0 * sample.n**-0.2, support, boundary)
    _, P = _subsample_fits(sample, m, B_sub, rng, replace)
    offset, A = smle_design(t, sample.times, c_opt * m**-0.2, support, boundary)
    sub = offset + P @ A.T
    if boundary:
        sub = np.clip(sub, 0.0, 1.0)
    est = (sub - pilot).mean(axis=0) * (m / sample.n) ** 0.4
    return float(est[0]) if scalar else est


def bias_direct_estimate(sample, t, h, hbar=None, support=None, c_used=None, *, boundary=True,
                         rng=None, m=None, B_sub=500, c_grid=None, c0=None):
    """Plug-in bias ``c^2 f'(t) / 2 * int u^2 K * n^(-2/5)``.

    ``f'`` is the kernel derivative estimate from the MLE with bandwidth
    ``hbar``; ``hbar=None`` selects ``cbar n^(-1/9)`` by subsampling.
    """
    support = support if support is not None else sample.support_or_range()
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = sample.n
    if hbar is None:
        sel = select_derivative_bandwidth(sample, t, c_grid, m, B_sub, c0, rng,
                                          support=support, boundary=boundary)
        hbar = sel.c_opt * n ** (-1 / 9)
    values = group_values(sample.multiplicities, sample.statuses)
    p = jump_sizes(values, sample.multiplicities)
    fprime = derivative_design(t, sample.times, hbar, support, boundary) @ p
    if c_used is None:
        c_used = np.asarray(h, dtype=float) * n**0.2
    est = np.asarray(c_used) ** 2 * fprime / 2 * float(MOMENT2) * n**-0.4
    est = np.broadcast_to(est, t.shape)
    return float(est[0]) if scalar else est


# --------------------------------------------------------------------------
# interval constructors


def resolve_bandwidths(sample, req: CiRequest, rng: RngSpec, support):
    """Per-grid-point bandwidths and the ``c_opt`` values behind them (if any)."""
    t = req.grid.points
    rule = req.bandwidth
    if rule.kind == "fixed":
        return np.full(t.size, rule.h), None
    sel = select_bandwidth(sample, t, rule.c_grid, rule.m, rule.B_sub, rule.c0, rng,
                           support=support, boundary=req.boundary, replace=rule.replace)
    return rule.factor * sel.c_opt * sample.n ** -rule.exponent, sel.c_opt


def resolve_bias(sample, req: CiRequest, h, c_opt, rng: RngSpec, support):
    t = req.grid.points
    if req.bias_rule == "none":
        return np.zeros(t.size)
    if req.bias_rule == "true_beta":
        # beta(t) n^(-2/5) with c = h n^(1/5) reduces to h^2 f0'(t) mu2 / 2
        return h**2 * np.asarray(req.model.f0_prime(t), dtype=float) / 2 * float(MOMENT2)
    rule = req.bandwidth
    if req.bias_rule == "subsample":
        c = c_opt if c_opt is not None else h * sample.n**0.2
        return bias_subsample_estimate(sample, t, c, rule.m, rule.B_sub, rule.c0, rng,
                                       support=support, boundary=req.boundary)
    return bias_direct_estimate(sample, t, h, None, support, boundary=req.boundary, rng=rng,
                                m=rule.m, B_sub=rule.B_sub, c_grid=rule.c_grid, c0=rule.c0)


def _prepare(sample, req, rng):
    support = sample.support_or_range()
    if req.boundary:
        req.grid.check_inside(support)
    h, c_opt = resolve_bandwidths(sample, req, rng.child(0), support)
    return support, h, c_opt


def _band(req, rng, t, est, lower, upper, h, discarded, bias):
    lower = np.clip(lower - bias, 0.0, 1.0)
    upper = np.clip(upper - bias, 0.0, 1.0)
    return ConfidenceBand(t, np.asarray(est, float), lower, upper, np.asarray(h, float),
                          np.asarray(discarded, np.int64), rng.master_seed, req.B, req.method)


def studentized_ci(sample: CurrentStatusSample, req: CiRequest, rng: RngSpec,
                   bias=None) -> ConfidenceBand:
    """Nonparametric bootstrap Studentized interval around the SMLE."""
    support, h, c_opt = _prepare(sample, req, rng)
    t = req.grid.points
    values = group_values(sample.multiplicities, sample.statuses)
    est = _smle_values(sample, t, h, support, req.boundary, values)
    S = _kernel_sq(t, sample.times, h) @ (
        sample.statuses * (1 - values) ** 2 + (sample.multiplicities - sample.statuses) * values**2
    ) / sample.n**2
    Fstar, Sstar = nonparametric_replicates(sample, t, h, rng.child(1), req.B, support,
                                            req.boundary, req.workers)
    lower, upper, disc = studentized_limits(est, S, Fstar, Sstar, est, req.alpha, t)
    if bias is None:
        bias = resolve_bias(sample, req, h, c_opt, rng.child(2), support)
    return _band(req, rng, t, est, lower, upper, h, disc, np.asarray(bias, dtype=float))


def bias_corrected_ci(sample, req: CiRequest, rng: RngSpec, bias) -> ConfidenceBand:
    """Studentized interval with both endpoints shifted down by ``bias`` (actual scale)."""
    bias = np.broadcast_to(np.asarray(bias, dtype=float), req.grid.points.shape)
    return studentized_ci(sample, replace(req, method="studentized"), rng, bias=bias)


def wald_sd(sample, t, h, estimator: int, *, support=None, boundary=True, rng=None, B=1000,
            workers=1):
    """Standard deviation ``s(t)`` of the SMLE on the actual scale.

    Estimator 1 plugs ``F_n`` and a kernel estimate of ``g`` into the limit
    variance, estimator 2 is the sample variance of the linearized SMLE, and
    estimator 3 is the root mean square of ``B`` bootstrap deviations.
    """
    if estimator not in (1, 2, 3):
        raise InvalidDatum("variance estimator must be 1, 2 or 3")
    support = support if support is not None else sample.support_or_range()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), t.shape)
    n = sample.n
    values = group_values(sample.multiplicities, sample.statuses)
    if estimator == 3:
        rng = rng if rng is not None else RngSpec(0)
        est = _smle_values(sample, t, h, support, boundary, values)
        Fstar, _ = nonparametric_replicates(sample, t, h, rng, B, support, boundary, workers)
        return np.sqrt(((Fstar - est) ** 2).mean(axis=0))
    g_t = np.array([smooth_density_of_g(sample.times, ti, hi, support, boundary,
                                        sample.multiplicities) for ti, hi in zip(t, h)])
    bad = np.flatnonzero(g_t < 1e-8)
    if bad.size:
        raise SingularDesign(f"density estimate of g vanishes at t={t[bad[0]]:.6g}",
                             float(t[bad[0]]))
    if estimator == 1:
        mle_t = step_from_values(sample.times, values)(t)
        # n^(-2/5) sigma_1 with c = h n^(1/5)
        return np.sqrt(mle_t * (1 - mle_t) * float(L2NORM) / (n * h * g_t))
    resid = (sample.statuses * (1 - values) ** 2
             + (sample.multiplicities - sample.statuses) * values**2)
    s2 = np.empty(t.size)
    for i, (ti, hi) in enumerate(zip(t, h)):
        kern = (k_density((ti - sample.times) / hi) / hi) ** 2
        near = kern > 0
        g_T = smooth_density_of_g(sample.times, sample.times[near], hi, support, boundary,
                                  sample.multiplicities)
        s2[i] = np.sum(kern[near] * resid[near] / g_T**2) / n**2
    return np.sqrt(s2)


def wald_ci(sample, req: CiRequest, rng: RngSpec | None, variance_estimator: int,
            bias=None) -> ConfidenceBand:
    """Normal-quantile interval ``F_nh(t) -+ z s(t) - bias(t)``."""
    if variance_estimator not in (1, 2, 3):
        raise InvalidDatum("variance_estimator must be 1, 2 or 3")
    rng = rng if rng is not None else RngSpec(0)
    support, h, c_opt = _prepare(sample, req, rng)
    t = req.grid.points
    est = _smle_values(sample, t, h, support, req.boundary)
    s = wald_sd(sample, t, h, variance_estimator, support=support, boundary=req.boundary,
                rng=rng.child(1), B=req.B, workers=req.workers)
    z_hi, z_lo = norm.ppf(1 - req.alpha / 2), norm.ppf(req.alpha / 2)
    if bias is None:
        bias = resolve_bias(sample, req, h, c_opt, rng.child(2), support)
    return _band(req, rng, t, est, est - z_hi * s, est - z_lo * s, h,
                 np.zeros(t.size, np.int64), np.asarray(bias, dtype=float))


def senxu_ci(sample, req: CiRequest, rng: RngSpec) -> ConfidenceBand:
    """Smooth-bootstrap interval around the MLE, centred by the SMLE.

    Bias rules are not applied: the interval is built around the MLE.
    """
    support, h, _ = _prepare(sample, req, rng)
    t = req.grid.points
    values = group_values(sample.multiplicities, sample.statuses)
    mle_t = step_from_values(sample.times, values)(t)
    smle_t = _smle_values(sample, t, h, support, req.boundary, values)
    probs = _centering_probs(sample, h, support, req.boundary, values)
    _, _, mle_star = smooth_replicates(sample, t, h, probs, rng.child(1), req.B, support,
                                       req.boundary, req.workers)
    lower, upper = np.empty(t.size), np.empty(t.size)
    for i in range(t.size):
        z = mle_star[:, i] - smle_t[i]
        lower[i] = mle_t[i] - order_statistic_quantile(z, 1 - req.alpha / 2)
        upper[i] = mle_t[i] - order_statistic_quantile(z, req.alpha / 2)
    return _band(req, rng, t, mle_t, lower, upper, h, np.zeros(t.size, np.int64), 0.0)


def _centering_probs(sample, h, support, boundary, values):
    """SMLE at every inspection time, used as Bernoulli success probabilities.

    A single centering bandwidth is needed here; with per-point bandwidths
    the median is used.
    """
    hc = float(np.median(h))
    return np.clip(_smle_values(sample, sample.times, hc, support, boundary, values), 0.0, 1.0)


def smooth_smle_ci(sample, req: CiRequest, rng: RngSpec) -> ConfidenceBand:
    """Smooth-bootstrap Studentized interval, pivot centred at the convolution SMLE."""
    support, h, c_opt = _prepare(sample, req, rng)
    t = req.grid.points
    values = group_values(sample.multiplicities, sample.statuses)
    est = _smle_values(sample, t, h, support, req.boundary, values)
    S = _kernel_sq(t, sample.times, h) @ (
        sample.statuses * (1 - values) ** 2 + (sample.multiplicities - sample.statuses) * values**2
    ) / sample.n**2
    probs = _centering_probs(sample, h, support, req.boundary, values)
    F_n = step_from_values(sample.times, values)
    center = np.array([convolution_smle(F_n, ti, hi) for ti, hi in zip(t, h)])
    Fstar, Sstar, _ = smooth_replicates(sample, t, h, probs, rng.child(1), req.B, support,
                                        req.boundary, req.workers)
    lower, upper, disc = studentized_limits(est, S, Fstar, Sstar, center, req.alpha, t)
    bias = resolve_bias(sample, req, h, c_opt, rng.child(2), support)
    return _band(req, rng, t, est, lower, upper, h, disc, bias)


def confidence_band(sample: CurrentStatusSample, req: CiRequest, rng: RngSpec) -> ConfidenceBand:
    """Dispatch on ``req.method``."""
    if req.method == "studentized":
        return studentized_ci(sample, req, rng)
    if req.method.startswith("wald"):
        return wald_ci(sample, req, rng, int(req.method[-1]))
    if req.method == "senxu":
        return senxu_ci(sample, req, rng)
    return smooth_smle_ci(sample, req, rng)
