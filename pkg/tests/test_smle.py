import numpy as np
import pytest
from numpy.testing import assert_allclose

from curstat.data import BootstrapWeights, RngSpec, StepDistribution
from curstat.errors import InvalidDatum
from curstat.kernel import k_density, k_integrated
from curstat.mle import fit_mle
from curstat.sim import get_model, sample_model
from curstat.smle import asymptotic_moments, convolution_smle, s_nh_variance, smle

from oracles import toy_estimator


def test_smle_is_smooth_average_of_jumps():
    F = StepDistribution(np.array([0.5, 1.5]), np.array([0.4, 1.0]))
    t = np.array([0.8, 1.2])
    expected = 0.4 * k_integrated((t - 0.5) / 0.5) + 0.6 * k_integrated((t - 1.5) / 0.5)
    assert_allclose(smle(F, t, 0.5), expected)


def test_convolution_against_direct_quadrature():
    from scipy import integrate
    F = StepDistribution(np.array([0.6, 1.1, 1.4]), np.array([0.2, 0.7, 1.0]))
    h = 0.3

    def density(u):
        return sum(p * k_density((u - x) / h) / h for x, p in zip(F.knots, F.jumps))

    for t in (0.7, 1.0, 1.3):
        ref, _ = integrate.quad(lambda u: k_integrated((t - u) / h) * density(u), -1, 3,
                                points=[0.3, 0.8, 0.9, 1.1, 1.4, 1.7], limit=200, epsabs=1e-13)
        assert_allclose(convolution_smle(F, t, h), ref, atol=1e-12)


def test_smle_tracks_toy_estimator():
    model = get_model("uniform2")
    s = sample_model(model, 5000, RngSpec(4))
    h = 2 * 5000 ** -0.2
    toy = toy_estimator(s.expanded_times(), s.expanded_status, 1.0, h, model.F0, model.g)
    # difference is of smaller order than the n^(-2/5) fluctuation
    assert abs(smle(fit_mle(s), 1.0, h) - toy) < 0.5 * 5000 ** -0.4


def test_s_nh_with_unit_weights_equals_plain(uniform_sample):
    F = fit_mle(uniform_sample)
    ones = BootstrapWeights(np.ones(uniform_sample.n, dtype=np.int64))
    a = s_nh_variance(uniform_sample, F, [0.5, 1.0], 0.5)
    b = s_nh_variance(uniform_sample, F, [0.5, 1.0], 0.5, weights=ones)
    assert_allclose(a, b)


def test_s_nh_scaling():
    # with h = c n^(-1/5), n^(4/5) S_nh approaches g^2 times the limit variance
    model = get_model("uniform2")
    n, c = 20000, 2.0
    s = sample_model(model, n, RngSpec(8))
    h = c * n**-0.2
    val = n**0.8 * s_nh_variance(s, fit_mle(s), 1.0, h)
    sigma2 = asymptotic_moments(model, 1.0, c).variance
    assert_allclose(val, model.g(1.0) ** 2 * sigma2, rtol=0.15)


def test_asymptotic_moments_uniform():
    m = asymptotic_moments(get_model("uniform2"), 1.0, 2.0)
    assert m.bias_factor == 0.0
    assert_allclose(m.variance, 0.25 / (2.0 * 0.5) * 350 / 429)
    with pytest.raises(InvalidDatum):
        asymptotic_moments(get_model("uniform2"), 1.0, 0.0)


def test_asymptotic_bias_exponential():
    model = get_model("exp_trunc2")
    m = asymptotic_moments(model, 0.2, 1.5)
    assert_allclose(m.bias_factor, 1.5**2 * model.f0_prime(0.2) / 18)
    assert m.bias_factor < 0
