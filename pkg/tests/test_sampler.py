import math

import numpy as np
import pytest

from harmonic_chain import sampler as smp
from harmonic_chain.covariance import CLOSED_FORM, TIME_DOMAIN, cov_time_domain
from harmonic_chain.errors import DomainError, NumericalError
from harmonic_chain.kernel import kernel_l2
from harmonic_chain.stats import MomentAccumulator, empirical_cov

PI = math.pi


def test_small_windows():
    np.testing.assert_allclose(smp.stationary_cov_matrix(1).matrix, [[8 / (3 * PI)]])
    np.testing.assert_allclose(smp.stationary_cov_matrix(2).matrix,
                               [[8 / (3 * PI), 0.5], [0.5, 32 / (15 * PI)]], atol=1e-12)


def test_provenance():
    w = smp.stationary_cov_matrix(4)
    assert w.provenance[0, 2] == CLOSED_FORM
    assert w.provenance[0, 1] == TIME_DOMAIN
    w = smp.stationary_cov_matrix(3, 0.2)
    assert w.matrix[0, 1] == pytest.approx(cov_time_domain(1, 2, 0.2))


def test_large_window_is_psd():
    w = smp.stationary_cov_matrix(48)
    assert np.linalg.eigvalsh(w.matrix).min() > -1e-12


def test_not_psd_raises():
    with pytest.raises(NumericalError):
        smp.cholesky_root(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_single_site_variance():
    s = smp.build_sampler(1, 0.0, seed=3)
    x = smp.sample_stationary(s, 10**5)[:, 0]
    var = 8 / (3 * PI)
    assert abs(x.var(ddof=1) - var) < 3 * math.sqrt(2) * var / math.sqrt(x.size)
    assert abs(x.mean()) < 3 * math.sqrt(var / x.size)


def test_moments_of_window():
    s = smp.build_sampler(8, 0.0, seed=4)
    acc = MomentAccumulator(8).update(smp.sample_stationary(s, 10**5))
    for m, n, target in [(1, 1, 8 / (3 * PI)), (1, 2, 0.5), (1, 4, 0.0)]:
        est, se = empirical_cov(acc, m, n)
        assert abs(est - target) < 3 * se
    assert np.all(np.abs(acc.mean) < 3 * np.sqrt(np.diag(s.covariance.matrix) / acc.count))


def test_draws_are_addressable():
    s = smp.build_sampler(5, 0.0, seed=1)
    full = smp.sample_stationary(s, 10)
    np.testing.assert_array_equal(smp.sample_stationary(s, 4, start=6), full[6:])
    rng = np.random.default_rng(0)
    assert smp.sample_stationary(s, 3, rng=rng).shape == (3, 5)


def test_bad_arguments():
    with pytest.raises(DomainError):
        smp.stationary_cov_matrix(0)
    with pytest.raises(DomainError):
        smp.sample_stationary(smp.build_sampler(2), 0)


@pytest.mark.parametrize("n,T", [(1, 20.0), (2, 40.0), (5, 60.0)])
def test_finite_time_convolution_within_tail_bound(n, T):
    # variance reached at time T from rest falls short of the stationary value
    # by the kernel tail, which kernel_l2 bounds
    part = kernel_l2(n, 0.0, T)
    stationary = cov_time_domain(n, n, 0.0)
    short = stationary - 2 / PI * part.value
    assert 0 <= short <= 2 / PI * part.tail_bound
