import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from curstat.data import (CurrentStatusSample, Grid, RngSpec, StepDistribution,
                          draw_multinomial_weights, eval_step, ingest_sample, read_sample_csv)
from curstat.errors import EmptySample, InvalidDatum


def test_ingest_merges_ties():
    s = ingest_sample([(2.0, 1), (1.0, 0), (2.0, 0), (1.0, 1), (3.0, 1)])
    assert_array_equal(s.times, [1.0, 2.0, 3.0])
    assert_array_equal(s.multiplicities, [2, 2, 1])
    assert_array_equal(s.statuses, [1, 1, 1])
    assert s.n == 5 and s.k == 3


def test_ingest_with_counts():
    s = ingest_sample([(1.0, 1), (1.0, 0)], counts=[3, 2])
    assert_array_equal(s.multiplicities, [5])
    assert_array_equal(s.statuses, [3])


@pytest.mark.parametrize("pairs", [[(1.0, 2)], [(np.nan, 1)], [(np.inf, 0)]])
def test_ingest_rejects_bad_pairs(pairs):
    with pytest.raises(InvalidDatum):
        ingest_sample(pairs)


def test_empty_sample():
    with pytest.raises(EmptySample):
        ingest_sample([])


def test_sample_is_read_only():
    s = ingest_sample([(1.0, 1), (2.0, 0)])
    with pytest.raises(ValueError):
        s.times[0] = 5.0


def test_support_must_contain_times():
    with pytest.raises(InvalidDatum):
        ingest_sample([(1.0, 1), (3.0, 0)], support=(0.0, 2.0))
    s = ingest_sample([(1.0, 1)], support=(0.0, 2.0))
    assert s.support_or_range() == (0.0, 2.0)


def test_expanded_status_order():
    s = CurrentStatusSample(np.array([1.0, 2.0]), np.array([1, 2]), np.array([3, 2]))
    assert_array_equal(s.expanded_status, [0, 0, 1, 1, 1])
    assert_array_equal(s.expanded_times(), [1, 1, 1, 2, 2])


def test_group_sums_rows():
    s = CurrentStatusSample(np.array([1.0, 2.0]), np.array([1, 2]), np.array([3, 2]))
    counts = np.array([[1, 0, 2, 1, 0], [0, 0, 0, 0, 5]])
    w, st_ = s.group_sums(counts)
    assert_array_equal(w, [[3, 1], [0, 5]])
    assert_array_equal(st_, [[2, 1], [0, 5]])


def test_read_csv_comments_and_counts():
    text = "# comment\ntime,status,count\n0.5,1,2\n0.25,0,1\n"
    s = read_sample_csv(io.StringIO(text))
    assert_array_equal(s.times, [0.25, 0.5])
    assert_array_equal(s.multiplicities, [1, 2])


def test_read_csv_reports_line():
    with pytest.raises(InvalidDatum, match="line 3"):
        read_sample_csv(io.StringIO("time,status\n1,0\nabc,1\n"))
    with pytest.raises(InvalidDatum, match="lacks"):
        read_sample_csv(io.StringIO("time,delta\n1,0\n"))


def test_synthetic_fixture(sero_sample):
    assert sero_sample.n == 230
    assert sero_sample.times[0] >= 0.0 and sero_sample.times[-1] <= 85.0


def test_step_evaluation():
    F = StepDistribution(np.array([1.0, 2.0]), np.array([0.25, 0.75]))
    assert_allclose(eval_step(F, [0.5, 1.0, 1.5, 2.0, 9.0]), [0, 0.25, 0.25, 0.75, 0.75])
    assert F(1.999) == 0.25


def test_grid_regular_and_validation():
    g = Grid.regular(0.02, 2.0, 0.02)
    assert len(g) == 100
    assert g.points[-1] == 2.0
    with pytest.raises(InvalidDatum):
        Grid(np.array([1.0, 0.5]))
    with pytest.raises(InvalidDatum):
        Grid.regular(0.0, 3.0, 1.0).check_inside((0.0, 2.0))


def test_rng_streams_are_reproducible_and_distinct():
    a = RngSpec(7).child(1, 2).generator(3).random(4)
    b = RngSpec(7).child(1, 2).generator(3).random(4)
    c = RngSpec(7).child(1, 2).generator(4).random(4)
    assert_array_equal(a, b)
    assert not np.allclose(a, c)
    with pytest.raises(InvalidDatum):
        RngSpec(-1)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 200), st.integers(0, 1000))
def test_multinomial_weights_sum_to_n(n, b):
    w = draw_multinomial_weights(n, RngSpec(3), b)
    assert w.counts.sum() == n and w.counts.min() >= 0 and w.counts.size == n


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 1)), min_size=1, max_size=40))
def test_grouping_preserves_counts(pairs):
    s = ingest_sample([(float(t), d) for t, d in pairs])
    assert s.n == len(pairs)
    assert s.statuses.sum() == sum(d for _, d in pairs)
    assert np.all(np.diff(s.times) > 0)
