import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from harmonic_chain import sde
from harmonic_chain.errors import ConfigError
from harmonic_chain.kernel import kernel_l2
from harmonic_chain.propagator import ChainState, coupling_matrix, evolve_unforced


def test_em_step_examples():
    z = sde.em_step(ChainState(np.zeros(4)), 0.1, 0.0)
    assert not np.any(z.amplitudes)
    a = sde.em_step(ChainState([0.0, 1.0, 0.0, 0.0]), 0.01, 0.0).amplitudes
    np.testing.assert_allclose(a, [-0.01, 1.0, 0.01, 0.0], atol=1e-16)


def test_em_step_ito_isometry():
    dt, count = 0.01, 10**6
    xi = np.random.default_rng(11).standard_normal(count)
    a = sde._euler_update(np.zeros((3, count)), dt, np.zeros(3), xi)
    sq = a[0] ** 2
    assert abs(sq.mean() - dt) < 3 * sq.std() / math.sqrt(count)


def test_noise_table_single_site():
    t = sde.build_noise_table(1, 0.0, 0.3)
    np.testing.assert_allclose(t.cov, [[0.3]], atol=1e-15)
    t = sde.build_noise_table(1, 1.0, 0.3)
    np.testing.assert_allclose(t.cov, [[(1 - math.exp(-0.6)) / 2]], atol=1e-15)


@given(st.integers(1, 60), st.floats(0.01, 5.0))
def test_noise_table_invariants(N, dt):
    t = sde.build_noise_table(N, 0.0, dt)
    assert np.trace(t.cov) == pytest.approx(dt, abs=1e-10)
    assert t.cov[0, 0] <= dt * (1 + 1e-13)
    np.testing.assert_allclose(t.cov, t.cov.T, atol=0)
    assert np.linalg.eigvalsh(t.cov).min() > -1e-12
    np.testing.assert_allclose(t.root @ t.root.T, t.cov, atol=1e-12)


@pytest.mark.parametrize("N,nu,dt", [(8, 0.0, 0.5), (20, 0.3, 1.0), (33, 0.05, 2.0)])
def test_spectral_matches_van_loan(N, nu, dt):
    flow_s, cov_s = sde._spectral_tables(N, nu, dt)
    flow_v, cov_v = sde._van_loan_tables(coupling_matrix(N, nu), dt)
    np.testing.assert_allclose(flow_s, flow_v, atol=1e-12)
    np.testing.assert_allclose(cov_s, cov_v, atol=1e-12)


def test_exact_step_without_noise_is_unforced_flow():
    a = np.random.default_rng(2).standard_normal(24)
    t = sde.build_noise_table(24, 0.0, 0.7)
    out = sde.exact_step(ChainState(a), t).amplitudes
    np.testing.assert_allclose(out, evolve_unforced(ChainState(a), 0.7, pad=0).amplitudes,
                               atol=1e-12)


def test_exact_step_dimension_mismatch():
    t = sde.build_noise_table(5, 0.0, 0.1)
    with pytest.raises(ConfigError):
        sde.exact_step(ChainState(np.zeros(4)), t)


def _propagate_cov(table, steps, P=None):
    N = table.N
    P = np.zeros((N, N)) if P is None else P
    for _ in range(steps):
        P = table.flow @ P @ table.flow.T + table.cov
    return P


def test_variance_tracks_kernel_integral():
    # inside the light cone the truncated chain reproduces the infinite one
    table = sde.build_noise_table(64, 0.0, 0.5)
    P = _propagate_cov(table, 20)
    expect = 2 / math.pi * kernel_l2(1, 0.0, 10.0).value
    assert P[0, 0] == pytest.approx(expect, abs=1e-10)


def test_reflecting_and_absorbing_windows_agree():
    # t = 28 = (N - W) / 2: the front has entered the layer at sites 49..64
    W, N, dt, steps = 8, 64, 0.5, 56
    refl = _propagate_cov(sde.build_noise_table(N, 0.0, dt), steps)
    prof = sde.damping_profile(N, 0.0, sde.AbsorbingLayer(16, 2.0))
    absorb = _propagate_cov(sde.build_noise_table(N, prof, dt), steps)
    np.testing.assert_allclose(refl[:W, :W], absorb[:W, :W], atol=1e-12)
    # inside the layer the two differ
    assert abs(refl[52, 52] - absorb[52, 52]) > 1e-3


def test_euler_weak_error_is_first_order():
    # E a_1(T)^2 from the Euler moment recursion against the exact law
    N, T = 32, 10.0
    exact = _propagate_cov(sde.build_noise_table(N, 0.0, 1.0), 10)[0, 0]
    A = coupling_matrix(N)
    e1 = np.zeros((N, N))
    e1[0, 0] = 1.0
    gaps = []
    for dt in (0.02, 0.01, 0.005):
        F = np.eye(N) + dt * A
        P = np.zeros((N, N))
        for _ in range(int(round(T / dt))):
            P = F @ P @ F.T + dt * e1
        gaps.append(abs(P[0, 0] - exact))
    assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.1)
    assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=0.1)


def test_energy_grows_linearly():
    cfg = sde.SimConfig(N=24, dt=0.5, T=5.0, trajectories=4000, seed=5)
    obs = sde.EnergyObserver()
    sde.simulate(cfg, [obs])
    t, mean, se = obs.series()
    z = (mean[1:] - t[1:]) / se[1:]
    assert np.max(np.abs(z)) < 4.0
    assert abs(z[-1]) < 3.0


def test_single_trajectory_zero_horizon():
    obs = sde.EnergyObserver()
    rep = sde.simulate(sde.SimConfig(N=4, T=0.0, trajectories=1), [obs])
    t, mean, _ = obs.series()
    assert list(t) == [0.0] and mean[0] == 0.0
    assert rep.config["T"] == 0.0


def test_deterministic_across_threads():
    cfg = sde.SimConfig(N=12, dt=0.25, T=2.0, trajectories=700, seed=9, chunk=64)
    out = []
    for threads in (1, 4):
        rep = sde.simulate(cfg, [sde.EnergyObserver(), sde.WindowCovarianceObserver([1, 2, 3])],
                           threads=threads)
        out.append(rep.to_csv())
    assert out[0] == out[1]


def test_euler_integrator_runs():
    cfg = sde.SimConfig(N=8, dt=0.01, T=0.5, trajectories=50, integrator="euler",
                        absorbing_layer=sde.AbsorbingLayer(2, 1.0))
    obs = sde.EnergyObserver()
    sde.simulate(cfg, [obs])
    assert np.all(np.isfinite(obs.series()[1]))


def test_damping_profile():
    prof = sde.damping_profile(10, 0.1, sde.AbsorbingLayer(4, 2.0))
    np.testing.assert_allclose(prof[:6], 0.1)
    np.testing.assert_allclose(prof[6:], 0.1 + 2.0 * (np.arange(1, 5) / 4) ** 2)


@pytest.mark.parametrize("kwargs", [
    {"N": 0}, {"N": 4, "dt": 0.0}, {"N": 4, "dt": 2.0, "T": 1.0}, {"N": 4, "nu": -1.0},
    {"N": 4, "integrator": "rk4"}, {"N": 4, "trajectories": 0},
    {"N": 4, "absorbing_layer": sde.AbsorbingLayer(5, 1.0)},
    {"N": 4, "absorbing_layer": sde.AbsorbingLayer(2, 0.0)},
])
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        sde.SimConfig(**kwargs)


def test_config_error_names_field():
    with pytest.raises(ConfigError, match="dt"):
        sde.SimConfig(N=4, dt=-1.0)


def test_absorbing_layer_parse():
    assert sde.AbsorbingLayer.parse("16:2.5") == sde.AbsorbingLayer(16, 2.5)
    with pytest.raises(ConfigError):
        sde.AbsorbingLayer.parse("16")
