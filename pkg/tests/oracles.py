"""Independent reference computations used only by the tests."""

import itertools

import numpy as np
from scipy import integrate


def lower_hull_slopes(values, weights):
    """Left slopes of the greatest convex minorant at each cusum point, via a monotone chain.

    Points with zero weight share the abscissa of their predecessor and are
    reported as NaN; the comparison is made at positive-weight points.
    """
    w = np.asarray(weights, dtype=float)
    y = np.concatenate(([0.0], np.cumsum(w * np.asarray(values, dtype=float))))
    x = np.concatenate(([0.0], np.cumsum(w)))
    # collapse repeated abscissae, keeping the lowest ordinate
    pts = {}
    for xi, yi in zip(x, y):
        pts[xi] = min(yi, pts.get(xi, np.inf))
    xs = sorted(pts)
    hull = []
    for px in xs:
        py = pts[px]
        while len(hull) >= 2:
            (ax, ay), (bx, by) = hull[-2], hull[-1]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) <= 0:
                hull.pop()
            else:
                break
        hull.append((px, py))
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    out = np.full(w.size, np.nan)
    for i in range(w.size):
        if w[i] > 0:
            a, b = x[i], x[i + 1]
            out[i] = (np.interp(b, hx, hy) - np.interp(a, hx, hy)) / (b - a)
    return out


def _loglik_terms(w, s, levels):
    """Per-time log likelihood at each level; rows are times, columns levels."""
    lv = np.asarray(levels, dtype=float)[None, :]
    s = np.asarray(s, dtype=float)[:, None]
    f = np.asarray(w, dtype=float)[:, None] - s
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(s > 0, s * np.log(lv), 0.0)
        b = np.where(f > 0, f * np.log1p(-lv), 0.0)
    return a + b


def monotone_grid_max_loglik(w, s, levels):
    """Exact maximum over nondecreasing level sequences by dynamic programming."""
    terms = _loglik_terms(w, s, levels)
    best = terms[0].copy()
    for row in terms[1:]:
        best = row + np.maximum.accumulate(best)
    return float(best.max())


def enumerate_max_loglik(w, s, levels):
    """The same maximum by listing every nondecreasing sequence (small sizes only)."""
    terms = _loglik_terms(w, s, levels)
    k = terms.shape[0]
    best = -np.inf
    for combo in itertools.combinations_with_replacement(range(len(levels)), k):
        best = max(best, sum(terms[i, j] for i, j in enumerate(combo)))
    return float(best)


def isotonic_grid_ls(values, weights, levels):
    """Weighted least squares over nondecreasing sequences on a level grid, by DP."""
    lv = np.asarray(levels, dtype=float)
    cost = np.asarray(weights, dtype=float)[:, None] * (np.asarray(values, dtype=float)[:, None] - lv[None, :]) ** 2
    k = cost.shape[0]
    best = cost[0].copy()
    arg = np.zeros((k, lv.size), dtype=int)
    for i in range(1, k):
        run = np.maximum.accumulate(-best)
        idx = np.zeros(lv.size, dtype=int)
        cur = 0
        for j in range(lv.size):
            if best[j] <= best[cur]:
                cur = j
            idx[j] = cur
        arg[i] = idx
        best = cost[i] + -run
    j = int(np.argmin(best))
    fit = np.empty(k)
    for i in range(k - 1, -1, -1):
        fit[i] = lv[j]
        j = arg[i, j]
    return fit


def l2_step_vs_linear(F, slope, intercept, lo, hi):
    """Exact ``(int_lo^hi (F(t) - a - b t)^2 dt)^(1/2)`` for a step function ``F``."""
    inner = F.knots[(F.knots > lo) & (F.knots < hi)]
    edges = np.concatenate(([lo], inner, [hi]))
    a, b = edges[:-1], edges[1:]
    c = F(a) - intercept
    # int_a^b (c - slope t)^2 dt
    total = c**2 * (b - a) - c * slope * (b**2 - a**2) + slope**2 * (b**3 - a**3) / 3
    return float(np.sqrt(total.sum()))


def toy_estimator(times, statuses, t, h, F0, g):
    """Linearized SMLE with the true ``F0`` and ``g`` plugged in (uncorrected interior form)."""
    from curstat.kernel import k_density, k_integrated
    # int IK_h(t - u) dF0(u) for F0 uniform on [0, 2]
    val, _ = integrate.quad(lambda u: k_integrated((t - u) / h) * 0.5, 0.0, 2.0)
    T = np.asarray(times, dtype=float)
    D = np.asarray(statuses, dtype=float)
    corr = np.sum(k_density((t - T) / h) / h * (D - F0(T)) / g(T)) / T.size
    return val + corr


def score_by_hull(times, covariates, statuses, beta, eps):
    """Truncated score with the profile MLE computed from the lower hull, in plain numpy."""
    u = np.asarray(times) - beta * np.asarray(covariates)
    knots, inv = np.unique(u, return_inverse=True)
    w = np.bincount(inv).astype(float)
    s = np.bincount(inv, weights=statuses)
    F = lower_hull_slopes(s / w, w)[inv]
    keep = (F >= eps) & (F <= 1 - eps)
    return float(np.sum(covariates[keep] * (statuses[keep] - F[keep]))), int(keep.sum())


def sandwich_variance_model1(eps=0.001):
    """``W / V^2`` for T, X ~ U(0, 2), beta = 1/2 and the quartic error on [3/8, 5/8]."""
    def F0(u):
        s = np.clip(u - 0.375, 0.0, 0.25)
        return 48 * s * s - 128 * s**3

    def f0(u):
        return 384 * (u - 0.375) * (0.625 - u) if 0.375 <= u <= 0.625 else 0.0

    def parts(u):
        xl, xh = max(0.0, -2 * u), min(2.0, 4 - 2 * u)
        dens = (xh - xl) / 4
        cond_var = (xh - xl) ** 2 / 12
        return dens, cond_var

    lo, hi = _truncation_limits(F0, 0.375, 0.625, eps)
    V = integrate.quad(lambda u: f0(u) * np.prod(parts(u)), lo, hi, epsabs=1e-13)[0]
    W = integrate.quad(lambda u: F0(u) * (1 - F0(u)) * np.prod(parts(u)), lo, hi,
                       epsabs=1e-13)[0]
    return W / V**2


def sandwich_variance_model2(eps=0.001):
    """``W / V^2`` for standard normal T, X and error, beta = 1 (U = T - X ~ N(0, 2))."""
    from scipy.stats import norm
    g = norm(scale=np.sqrt(2)).pdf
    lo, hi = norm.ppf(eps), norm.ppf(1 - eps)
    V = integrate.quad(lambda u: norm.pdf(u) * 0.5 * g(u), lo, hi, epsabs=1e-13)[0]
    W = integrate.quad(lambda u: norm.cdf(u) * norm.sf(u) * 0.5 * g(u), lo, hi, epsabs=1e-13)[0]
    return W / V**2


def _truncation_limits(F0, a, b, eps):
    from scipy.optimize import brentq
    return brentq(lambda u: F0(u) - eps, a, b), brentq(lambda u: F0(u) - (1 - eps), a, b)
