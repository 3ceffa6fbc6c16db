import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from harmonic_chain import propagator as pr
from harmonic_chain.errors import DimensionError, DomainError
from harmonic_chain.orthopoly import quad_rule

S = math.sqrt(2 / math.pi)


def J(n, x):
    return float(mp.besselj(n, x))


def test_spectral_examples():
    f = pr.to_spectral(pr.ChainState([1.0]), quad_rule(1))
    np.testing.assert_allclose(f.values, [S])
    rule = quad_rule(2)
    f = pr.to_spectral(pr.ChainState([0.0, 1.0]), rule)
    np.testing.assert_allclose(f.values, 2j * rule.nodes * S, atol=1e-15)
    f = pr.to_spectral(pr.ChainState(np.zeros(5)), quad_rule(8))
    assert not np.any(f.values)


def test_spectral_dimension_checks():
    with pytest.raises(DimensionError):
        pr.to_spectral(pr.ChainState(np.ones(5)), quad_rule(4))
    f = pr.to_spectral(pr.ChainState(np.ones(4)), quad_rule(4))
    with pytest.raises(DimensionError):
        pr.from_spectral(f, 5)


def test_round_trip_small():
    a = np.array([0.3, -1.2, 0.5])
    back = pr.from_spectral(pr.to_spectral(pr.ChainState(a), quad_rule(4)), 3)
    np.testing.assert_allclose(back.amplitudes, a, atol=1e-14)


def test_constant_field_is_first_site():
    rule = quad_rule(6)
    field = pr.SpectralField(rule, np.full(6, S, dtype=complex))
    np.testing.assert_allclose(pr.from_spectral(field, 6).amplitudes, np.eye(6)[0], atol=1e-14)


@given(st.integers(1, 48), st.integers(0, 2**31))
def test_round_trip_random(N, seed):
    a = np.random.default_rng(seed).standard_normal(N)
    back = pr.from_spectral(pr.to_spectral(pr.ChainState(a), quad_rule(2 * N)), N)
    np.testing.assert_allclose(back.amplitudes, a, atol=1e-12)


def test_zero_time_is_identity():
    a = np.random.default_rng(1).standard_normal(9)
    np.testing.assert_allclose(pr.evolve_unforced(pr.ChainState(a), 0.0).amplitudes, a, atol=1e-14)


def test_impulse_response_is_bessel():
    a = pr.evolve_unforced(pr.ChainState.impulse(12), 1.0).amplitudes
    np.testing.assert_allclose(a, [n * J(n, 2.0) for n in range(1, 13)], atol=1e-14)
    assert a[0] == pytest.approx(0.576725, abs=1e-6)


def test_single_site_is_frozen():
    out = pr.evolve_unforced(pr.ChainState([2.5]), 7.0, pad=0)
    assert out.amplitudes[0] == pytest.approx(2.5, abs=1e-14)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        pr.evolve_unforced(pr.ChainState([1.0]), -1.0)


@given(st.integers(1, 40), st.floats(0.0, 5.0), st.floats(0.0, 30.0))
def test_truncated_flow_matches_expm(N, nu, t):
    A = pr.coupling_matrix(N, nu)
    np.testing.assert_allclose(pr.truncated_flow(N, nu, t), expm(t * A), atol=1e-11)


@given(st.integers(2, 30), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_semigroup(N, s, t):
    lhs = pr.truncated_flow(N, 0.0, s) @ pr.truncated_flow(N, 0.0, t)
    np.testing.assert_allclose(lhs, pr.truncated_flow(N, 0.0, s + t), atol=1e-12)


@given(st.integers(1, 40), st.floats(0.0, 50.0), st.integers(0, 2**31))
def test_unforced_energy_conserved(N, t, seed):
    a = np.random.default_rng(seed).standard_normal(N)
    out = pr.evolve_unforced(pr.ChainState(a), t, pad=0).amplitudes
    assert np.sum(out**2) == pytest.approx(np.sum(a**2), rel=1e-12)


def test_padded_window_matches_infinite_chain():
    a = np.random.default_rng(3).standard_normal(6)
    t = 4.0
    out = pr.evolve_unforced(pr.ChainState(a), t).amplitudes
    K = np.array([[pr.propagator_entry_closed(n, m, t) for m in range(1, 7)] for n in range(1, 7)])
    np.testing.assert_allclose(out, K @ a, atol=1e-13)


def test_propagator_examples():
    assert pr.propagator_entry(2, 5, 0.0) == 0.0
    assert pr.propagator_entry(4, 4, 0.0) == pytest.approx(1.0)
    assert pr.propagator_entry(1, 1, 1.0) == pytest.approx(J(0, 2) + J(2, 2), abs=1e-13)
    assert pr.propagator_entry(1, 1, 1.0) == pytest.approx(0.576725, abs=1e-6)
    # J_2(2) + J_4(2) = 3 J_3(2) = 0.386830
    v = pr.propagator_entry(3, 1, 1.0)
    assert v == pytest.approx(J(2, 2) + J(4, 2), abs=1e-13)
    assert v == pytest.approx(3 * J(3, 2), abs=1e-13)


@given(st.integers(1, 20), st.integers(1, 20), st.floats(0.0, 25.0))
def test_propagator_quadrature_vs_bessel(n, m, t):
    assert pr.propagator_entry(n, m, t) == pytest.approx(pr.propagator_entry_closed(n, m, t), abs=1e-12)


@given(st.integers(1, 8), st.integers(1, 8), st.floats(0.0, 15.0))
def test_propagator_orthogonality(n, m, t):
    # columns of the infinite-chain propagator are orthonormal
    K = lambda k, j: pr.propagator_entry_closed(k, j, t)
    total = sum(K(k, n) * K(k, m) for k in range(1, int(2 * t) + 60))
    assert total == pytest.approx(float(n == m), abs=1e-12)


def test_fixed_points():
    pats = pr.fixed_point_patterns(10)
    assert pr.fixed_point_residual(pats["odd-sites"]) == 0.0
    assert pr.fixed_point_residual(pats["even-sites"]) == 1.0
    assert pr.fixed_point_residual(pr.ChainState(np.zeros(7))) == 0.0


def test_periodic_orbit():
    assert pr.periodic_orbit_eval(0.5, 1, 0.0) == pytest.approx(S)
    n = np.arange(1, 12)
    np.testing.assert_allclose(pr.periodic_orbit_eval(0.5, n, 2 * math.pi),
                               pr.periodic_orbit_eval(0.5, n, 0.0), atol=1e-12)
    with pytest.raises(DomainError):
        pr.periodic_orbit_eval(1.0, 1, 0.0)


def test_chain_state_validation():
    with pytest.raises(DomainError):
        pr.ChainState([1.0, np.nan])
    with pytest.raises(DimensionError):
        pr.ChainState(np.zeros((2, 2)))
