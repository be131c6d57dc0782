import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from curstat.errors import DegenerateDiagram
from curstat.gcm import CusumDiagram, gcm_slopes, pava_rows, weighted_isotonic_fit

from oracles import isotonic_grid_ls, lower_hull_slopes


def test_textbook_pooling():
    fit = weighted_isotonic_fit([1.0, 3.0, 2.0, 4.0], [1.0, 1.0, 1.0, 1.0])
    assert_allclose(fit, [1.0, 2.5, 2.5, 4.0])


def test_weights_shift_the_pool():
    fit = weighted_isotonic_fit([3.0, 1.0], [3.0, 1.0])
    assert_allclose(fit, [2.5, 2.5])


def test_gcm_of_convex_diagram_is_exact():
    d = CusumDiagram(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, -1.0, -1.0, 1.0]))
    assert_allclose(gcm_slopes(d), [-1.0, 0.0, 2.0])


def test_zero_width_segment_takes_block_slope():
    fit = weighted_isotonic_fit([0.0, 0.0, 1.0], [1.0, 0.0, 1.0])
    assert_allclose(fit[[0, 2]], [0.0, 1.0])


def test_degenerate_diagrams():
    with pytest.raises(DegenerateDiagram):
        CusumDiagram(np.array([0.0]), np.array([0.0]))
    with pytest.raises(DegenerateDiagram):
        gcm_slopes(CusumDiagram(np.array([0.0, 0.0]), np.array([0.0, 1.0])))
    with pytest.raises(DegenerateDiagram):
        weighted_isotonic_fit([1.0, 2.0], [0.0, 0.0])


def test_pava_rows_matches_single():
    rng = np.random.default_rng(5)
    W = rng.integers(0, 4, size=(6, 12)).astype(float)
    W[:, 0] = 1.0
    S = np.floor(W * rng.random(W.shape))
    out = pava_rows(S, W)
    for r in range(6):
        pos = W[r] > 0
        assert_allclose(out[r, pos], weighted_isotonic_fit(S[r] / np.where(pos, W[r], 1), W[r])[pos],
                        atol=1e-12)


def test_grid_least_squares_agrees_on_coarse_values():
    # with values on the level grid the constrained optimum also lies on the grid
    v = np.array([0.0, 1.0, 0.5, 0.5, 1.0])
    assert_allclose(weighted_isotonic_fit(v, np.ones(5)),
                    isotonic_grid_ls(v, np.ones(5), np.linspace(0, 1, 1201)), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.integers(0, 3)), min_size=1, max_size=30))
def test_pava_equals_lower_hull(pairs):
    v = np.array([p[0] for p in pairs])
    w = np.array([p[1] for p in pairs], dtype=float)
    if w.sum() == 0:
        w[0] = 1.0
    fit = weighted_isotonic_fit(v, w)
    ref = lower_hull_slopes(v, w)
    pos = w > 0
    assert_allclose(fit[pos], ref[pos], atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=25))
def test_isotonic_fit_is_monotone_and_mean_preserving(v):
    v = np.array(v)
    fit = weighted_isotonic_fit(v, np.ones(v.size))
    assert np.all(np.diff(fit) >= -1e-12)
    assert_allclose(fit.sum(), v.sum(), atol=1e-9)
