"""Known-truth models and Monte Carlo experiment drivers.

Every run ``r`` draws its data from ``rng.child(r)`` and its bootstrap
randomness from ``rng.child(r, 1)``, so two experiments with the same seed
see the same samples and results do not depend on the worker count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import ndtr

from ._parallel import chunks, pmap
from .boot import BandwidthRule, CiRequest, confidence_band
from .data import CurrentStatusSample, Grid, RngSpec, sample_from_arrays
from .errors import CurstatError, EstimatorError, InvalidDatum
from .regression import RegressionSample, bootstrap_sse_ci, pilot_interval, sse_estimate, wald_variance

MAX_FAILURE_RATE = 0.05
_EXP_MASS = 1.0 - math.exp(-2.0)


@dataclass(frozen=True)
class TruthModel:
    """A simulation model with closed-form ``F0``, ``f0``, ``f0'`` and ``g``.

    For regression models ``F0`` and its derivatives describe the error
    distribution and ``beta0`` is the true slope.
    """

    name: str
    support: tuple[float, float]
    F0: Callable
    f0: Callable
    f0_prime: Callable
    g: Callable
    draw: Callable
    beta0: float | None = None

    @property
    def is_regression(self) -> bool:
        return self.beta0 is not None


def _indicator(t, lo, hi):
    t = np.asarray(t, dtype=float)
    return ((t >= lo) & (t <= hi)).astype(float)


def _draw_uniform2(gen, n):
    T = gen.uniform(0.0, 2.0, n)
    X = gen.uniform(0.0, 2.0, n)
    return sample_from_arrays(T, (X <= T).astype(int), support=(0.0, 2.0))


def _exp_inverse(u):
    return -np.log1p(-u * _EXP_MASS)


def _draw_exp_trunc2(gen, n):
    T = gen.uniform(0.0, 2.0, n)
    X = _exp_inverse(gen.random(n))
    return sample_from_arrays(T, (X <= T).astype(int), support=(0.0, 2.0))


# quartic error law on [3/8, 5/8]; with s = e - 3/8, F = 48 s^2 - 128 s^3


def _quartic_cdf(e):
    s = np.clip(np.asarray(e, dtype=float) - 0.375, 0.0, 0.25)
    return 48.0 * s * s - 128.0 * s**3


def _quartic_pdf(e):
    e = np.asarray(e, dtype=float)
    return np.where((e >= 0.375) & (e <= 0.625), 384.0 * (e - 0.375) * (0.625 - e), 0.0)


def _quartic_pdf_prime(e):
    e = np.asarray(e, dtype=float)
    return np.where((e >= 0.375) & (e <= 0.625), 384.0 * (1.0 - 2.0 * e), 0.0)


_QUARTIC_KNOTS = np.linspace(0.375, 0.625, 4096)
_QUARTIC_TABLE = _quartic_cdf(_QUARTIC_KNOTS)


def quartic_inverse(u, tol=1e-10):
    """Inverse of the quartic error CDF: table lookup, then bisection to ``tol``."""
    u = np.asarray(u, dtype=float)
    j = np.clip(np.searchsorted(_QUARTIC_TABLE, u, side="right") - 1, 0, _QUARTIC_KNOTS.size - 2)
    a, b = _QUARTIC_KNOTS[j], _QUARTIC_KNOTS[j + 1]
    while np.max(b - a) > tol:
        mid = 0.5 * (a + b)
        below = _quartic_cdf(mid) < u
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def _draw_reg1(gen, n):
    T = gen.uniform(0.0, 2.0, n)
    X = gen.uniform(0.0, 2.0, n)
    e = quartic_inverse(gen.random(n))
    return RegressionSample(T, X, (0.5 * X + e <= T).astype(int))


def _draw_reg2(gen, n):
    T = gen.standard_normal(n)
    X = gen.standard_normal(n)
    e = gen.standard_normal(n)
    return RegressionSample(T, X, (X + e <= T).astype(int))


def _std_normal_pdf(x):
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2) / math.sqrt(2 * math.pi)


def _uniform2_cdf(t):
    return np.clip(np.asarray(t, dtype=float) / 2.0, 0.0, 1.0)


def _half_on_02(t):
    return 0.5 * _indicator(t, 0.0, 2.0)


def _zero(t):
    return 0.0 * np.asarray(t, dtype=float)


def _exp_cdf(t):
    return -np.expm1(-np.clip(np.asarray(t, dtype=float), 0.0, 2.0)) / _EXP_MASS


def _exp_pdf(t):
    return np.exp(-np.asarray(t, dtype=float)) / _EXP_MASS * _indicator(t, 0.0, 2.0)


def _exp_pdf_prime(t):
    return -_exp_pdf(t)


def _std_normal_pdf_prime(x):
    return -np.asarray(x, dtype=float) * _std_normal_pdf(x)


MODELS = {
    "uniform2": TruthModel("uniform2", (0.0, 2.0), _uniform2_cdf, _half_on_02, _zero,
                           _half_on_02, _draw_uniform2),
    "exp_trunc2": TruthModel("exp_trunc2", (0.0, 2.0), _exp_cdf, _exp_pdf, _exp_pdf_prime,
                             _half_on_02, _draw_exp_trunc2),
    "reg_model1": TruthModel("reg_model1", (0.375, 0.625), _quartic_cdf, _quartic_pdf,
                             _quartic_pdf_prime, _half_on_02, _draw_reg1, beta0=0.5),
    "reg_model2": TruthModel("reg_model2", (-math.inf, math.inf), ndtr, _std_normal_pdf,
                             _std_normal_pdf_prime, _std_normal_pdf, _draw_reg2, beta0=1.0),
}


def get_model(name: str) -> TruthModel:
    try:
        return MODELS[name]
    except KeyError:
        raise InvalidDatum(f"unknown model {name!r}; choose from {', '.join(MODELS)}") from None


def sample_model(model: TruthModel | str, n: int, rng: RngSpec | np.random.Generator
                 ) -> CurrentStatusSample | RegressionSample:
    model = get_model(model) if isinstance(model, str) else model
    if n < 1:
        raise InvalidDatum("sample size must be positive")
    gen = rng.generator(0) if isinstance(rng, RngSpec) else rng
    return model.draw(gen, int(n))


# --------------------------------------------------------------------------
# distribution-function coverage


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    t: np.ndarray
    noncoverage: np.ndarray
    avg_length: np.ndarray
    n: int
    N: int
    B: int
    method: str
    config: dict = field(default_factory=dict)
    failures: int = 0
    wall_time: float = 0.0

    def to_csv(self, path=None) -> str:
        lines = [f"# {k}={v}" for k, v in self.config.items()]
        lines.append(f"# failures={self.failures}")
        lines.append("t,noncoverage,avg_length,n,N,B,method")
        for t, nc, al in zip(self.t, self.noncoverage, self.avg_length):
            lines.append(f"{t:.6g},{nc:.6g},{al:.6g},{self.n},{self.N},{self.B},{self.method}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _coverage_runs(model, n, req, rng, block):
    """Coverage indicators and lengths for runs in ``block``; NaN rows mark failures."""
    truth = model.F0(req.grid.points)
    miss = np.full((len(block), req.grid.points.size), np.nan)
    length = np.full_like(miss, np.nan)
    for j, r in enumerate(block):
        sample = sample_model(model, n, rng.child(r))
        try:
            band = confidence_band(sample, req, rng.child(r, 1))
        except EstimatorError:
            continue
        miss[j] = ~band.covers(truth)
        length[j] = band.length
    return miss, length


def run_coverage_experiment(model, n, N, B, grid, method="studentized",
                            bandwidth_rule: BandwidthRule | None = None, bias_rule="none",
                            alpha=0.05, seed=0, workers=1, boundary=True) -> ExperimentReport:
    """Non-coverage of ``F0(t)`` and mean band length over ``N`` simulated samples.

    Runs failing with an estimator error are excluded and counted; more than
    5% failures raises the first-seen error class.
    """
    model = get_model(model) if isinstance(model, str) else model
    if model.is_regression:
        raise InvalidDatum("coverage experiments need a distribution-function model")
    if min(n, N, B) < 1:
        raise InvalidDatum("n, N and B must be positive")
    grid = grid if isinstance(grid, Grid) else Grid(np.asarray(grid, dtype=float))
    rule = bandwidth_rule if bandwidth_rule is not None else BandwidthRule.fixed(
        (model.support[1] - model.support[0]) * n**-0.2)
    req = CiRequest(grid=grid, alpha=alpha, B=max(B, 2), bandwidth=rule, method=method,
                    bias_rule=bias_rule, model=model, boundary=boundary, workers=1)
    rng = RngSpec(seed)
    start = time.perf_counter()
    parts = pmap(partial(_coverage_runs, model, n, req, rng), chunks(N, 10), workers)
    miss = np.concatenate([p[0] for p in parts])
    length = np.concatenate([p[1] for p in parts])
    ok = ~np.isnan(miss[:, 0])
    failures = int((~ok).sum())
    if failures > MAX_FAILURE_RATE * N:
        raise EstimatorError(f"{failures} of {N} runs failed (limit {MAX_FAILURE_RATE:.0%})")
    config = {"model": model.name, "n": n, "N": N, "B": B, "method": method,
              "bandwidth": rule.describe(), "bias_rule": bias_rule, "alpha": alpha,
              "seed": seed, "boundary": boundary}
    return ExperimentReport(grid.points, miss[ok].mean(axis=0), length[ok].mean(axis=0), n, N, B,
                            method, config, failures, time.perf_counter() - start)


# --------------------------------------------------------------------------
# regression experiments


@dataclass(frozen=True, eq=False)
class RegressionReport:
    stats: dict
    config: dict
    estimates: np.ndarray
    wall_time: float = 0.0

    def to_csv(self, path=None) -> str:
        lines = [f"# {k}={v}" for k, v in self.config.items()]
        lines.append("stat,value")
        lines += [f"{k},{v:.6g}" for k, v in self.stats.items()]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _regression_runs(model, n, B, search, alpha, interval, rng, block):
    out = np.full((len(block), 8), np.nan)
    for j, r in enumerate(block):
        sample = sample_model(model, n, rng.child(r))
        window = pilot_interval(sample, search)
        fit = sse_estimate(sample, window, with_profile=False)
        ci = None
        if B > 0:
            try:
                ci = bootstrap_sse_ci(sample, window, B, alpha, rng.child(r, 1), fit=fit,
                                     interval=interval)
            except CurstatError:
                pass
        try:
            wd = wald_variance(sample, fit.beta_hat, alpha)
        except CurstatError:
            wd = None
        out[j, 0] = fit.beta_hat
        out[j, 1] = float(fit.no_crossing)
        if ci is not None:
            out[j, 2:5] = ci.lower, ci.upper, ci.no_crossing
        if wd is not None:
            out[j, 5:8] = wd.lower, wd.upper, wd.variance
    return (out,)


def run_regression_experiment(model, n, N, B, search=(-10.0, 10.0), alpha=0.05, seed=0,
                              workers=1, interval="basic") -> RegressionReport:
    """Mean, ``n`` var, ``n`` MSE of the score estimator plus bootstrap and Wald CI summaries.

    ``B=0`` skips the bootstrap; its statistics are then reported as NaN.
    """
    model = get_model(model) if isinstance(model, str) else model
    if not model.is_regression:
        raise InvalidDatum(f"model {model.name!r} is not a regression model")
    if min(n, N) < 1 or B < 0 or B == 1:
        raise InvalidDatum("n and N must be positive and B either 0 or at least 2")
    rng = RngSpec(seed)
    start = time.perf_counter()
    parts = pmap(partial(_regression_runs, model, n, B, tuple(search), alpha, interval, rng),
                 chunks(N, 5), workers)
    res = np.concatenate([p[0] for p in parts])
    beta = res[:, 0]
    b0 = model.beta0
    boot_ok = ~np.isnan(res[:, 2])
    wald_ok = ~np.isnan(res[:, 5])
    if B > 0 and (~boot_ok).sum() > MAX_FAILURE_RATE * N:
        raise EstimatorError(f"{int((~boot_ok).sum())} of {N} bootstrap intervals failed")

    def cover(lo, hi):
        return float(np.mean((lo <= b0) & (b0 <= hi))) if lo.size else math.nan

    stats = {
        "mean": float(beta.mean()),
        "n_var": float(n * beta.var()),
        "n_mse": float(n * np.mean((beta - b0) ** 2)),
        "boot_cp": cover(res[boot_ok, 2], res[boot_ok, 3]),
        "boot_al": float(np.mean(res[boot_ok, 3] - res[boot_ok, 2])) if boot_ok.any() else math.nan,
        "wald_cp": cover(res[wald_ok, 5], res[wald_ok, 6]),
        "wald_al": float(np.mean(res[wald_ok, 6] - res[wald_ok, 5])) if wald_ok.any() else math.nan,
        "wald_var": float(np.mean(res[wald_ok, 7])) if wald_ok.any() else math.nan,
        "no_crossing_fits": float(res[:, 1].sum()),
        "no_crossing_replicates": float(np.nansum(res[:, 4])),
        "failed_bootstrap": float((~boot_ok).sum()) if B > 0 else 0.0,
        "failed_wald": float((~wald_ok).sum()),
    }
    config = {"model": model.name, "n": n, "N": N, "B": B, "alpha": alpha, "seed": seed,
              "search": f"{search[0]:g}:{search[1]:g}", "interval": interval}
    return RegressionReport(stats, config, beta, time.perf_counter() - start)
