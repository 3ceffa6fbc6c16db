"""Simulation of the forced chain truncated to ``N`` sites.

    da_n = (a_{n-1} - a_{n+1} - nu_n a_n) dt + delta_{n,1} dW,   a_0 = a_{N+1} = 0

Two integrators: Euler-Maruyama, and an exact one-step map
``a -> R(dt) a + N(0, Sigma(dt))`` with ``R`` the truncated flow and
``Sigma(dt) = int_0^dt R(r) e_1 e_1^T R(r)^T dr``.  With uniform damping both
come in closed form from the spectral transform; a damping ramp (absorbing
layer) falls back to the Van Loan block exponential.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from . import streams
from .errors import ConfigError, DimensionError, DomainError, NumericalError
from .orthopoly import SQRT_2_OVER_PI, quad_rule
from .propagator import ChainState, coupling_matrix, phased_basis, truncated_flow
from .report import ScenarioReport, Table
from .stats import MomentAccumulator

INTEGRATORS = ("exact", "euler")

# Entries beyond the light cone underflow; products of such entries are
# subnormal and make BLAS calls orders of magnitude slower.
_MATRIX_FLUSH = 1e-20
_STATE_FLUSH = 1e-100


def _flush(x: np.ndarray, level: float) -> np.ndarray:
    x[np.abs(x) < level] = 0.0
    return x


@dataclass(frozen=True)
class AbsorbingLayer:
    """Quadratic damping ramp ``nu_abs ((n - N0) / L)^2`` on the last ``L`` sites."""

    length: int
    max_damping: float

    @classmethod
    def parse(cls, text: str) -> "AbsorbingLayer":
        try:
            length, damping = text.split(":")
            return cls(int(length), float(damping))
        except ValueError:
            raise ConfigError(f"absorbing layer must look like L:nu_abs, got {text!r}")


@dataclass(frozen=True)
class SimConfig:
    N: int
    nu: float = 0.0
    dt: float = 0.1
    T: float = 1.0
    trajectories: int = 1
    seed: int = 0
    integrator: str = "exact"
    absorbing_layer: AbsorbingLayer | None = None
    initial: str = "zero"
    forcing: bool = True
    observe_every: int = 1
    chunk: int = 256

    def __post_init__(self):
        errors = []
        if self.N < 1:
            errors.append("N: must be >= 1")
        if self.nu < 0:
            errors.append("nu: must be >= 0")
        if not self.dt > 0:
            errors.append("dt: must be > 0")
        if self.T < 0:
            errors.append("T: must be >= 0")
        elif self.T > 0 and self.dt > self.T:
            errors.append("dt: must not exceed T")
        if self.trajectories < 1:
            errors.append("trajectories: must be >= 1")
        if self.integrator not in INTEGRATORS:
            errors.append(f"integrator: must be one of {INTEGRATORS}")
        if self.initial not in ("zero", "stationary"):
            errors.append("initial: must be 'zero' or 'stationary'")
        if self.observe_every < 1:
            errors.append("observe_every: must be >= 1")
        if self.chunk < 1:
            errors.append("chunk: must be >= 1")
        layer = self.absorbing_layer
        if layer is not None:
            if layer.length < 1 or layer.length > self.N:
                errors.append("absorbing_layer: length must lie in 1..N")
            if not layer.max_damping > 0:
                errors.append("absorbing_layer: max damping must be > 0")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def damping(self):
        """Scalar damping, or the per-site profile when a layer is configured."""
        return damping_profile(self.N, self.nu, self.absorbing_layer)


def damping_profile(N: int, nu: float, layer: AbsorbingLayer | None = None):
    if layer is None:
        return float(nu)
    n0 = N - layer.length
    prof = np.full(N, float(nu))
    ramp = (np.arange(n0 + 1, N + 1) - n0) / layer.length
    prof[n0:] += layer.max_damping * ramp**2
    return prof


def _damping_array(damping, N):
    return np.broadcast_to(np.asarray(damping, dtype=float), (N,))


def em_step(state: ChainState, dt: float, noise: float, damping=None) -> ChainState:
    """One Euler-Maruyama step with standard normal ``noise`` driving site 1.

    ``damping`` overrides ``state.nu`` and may be a per-site profile.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    d = state.nu if damping is None else damping
    a = _euler_update(state.amplitudes[:, None], dt, _damping_array(d, state.N),
                      np.array([noise], dtype=float))
    return ChainState(a[:, 0], state.time + dt, state.nu)


def _euler_update(a, dt, nu_n, xi):
    """Batch Euler-Maruyama update; ``a`` is ``(N, B)``, ``xi`` is ``(B,)``."""
    drift = -nu_n[:, None] * a
    drift[1:] += a[:-1]
    drift[:-1] -= a[1:]
    out = a + dt * drift
    out[0] += math.sqrt(dt) * xi
    return out


@dataclass(frozen=True)
class NoiseTable:
    """Exact one-step map for fixed ``(N, damping, dt)``.

    ``cov`` is ``Sigma(dt)``; ``root`` is an ``N x r`` factor with
    ``root @ root.T == cov`` built from the nonnegligible eigenpairs.
    """

    N: int
    dt: float
    damping: object
    flow: np.ndarray
    cov: np.ndarray
    root: np.ndarray

    @property
    def rank(self) -> int:
        return self.root.shape[1]


def _spectral_tables(N: int, nu: float, dt: float):
    rule = quad_rule(N)
    basis = phased_basis(N, rule)
    z = rule.nodes
    flow = truncated_flow(N, nu, dt)
    # column k of C is the k-th mode's share of R(r) e_1 at r = 0
    C = np.conj(basis).T * (rule.weights * SQRT_2_OVER_PI)
    lam = (2j * (z[:, None] - z[None, :]) - 2.0 * nu) * dt
    safe = np.where(lam == 0, 1.0, lam)
    E = np.where(lam == 0, dt, dt * np.expm1(safe) / safe)
    sigma = ((C @ E) @ np.conj(C).T).real
    return flow, sigma


def _van_loan_tables(A: np.ndarray, dt: float):
    N = A.shape[0]
    Q = np.zeros((N, N))
    Q[0, 0] = 1.0
    big = np.zeros((2 * N, 2 * N))
    big[:N, :N] = -A
    big[:N, N:] = Q
    big[N:, N:] = A.T
    ex = linalg.expm(big * dt)
    flow = ex[N:, N:].T
    return flow, flow @ ex[:N, N:]


def build_noise_table(N: int, nu, dt: float) -> NoiseTable:
    """Flow and one-step noise covariance; ``nu`` scalar or per-site profile."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    profile = np.asarray(nu, dtype=float)
    if profile.ndim == 0 or np.all(profile == profile.flat[0]):
        flow, sigma = _spectral_tables(N, float(profile.flat[0]), dt)
    else:
        if profile.shape != (N,):
            raise DimensionError(f"damping profile must have length {N}")
        flow, sigma = _van_loan_tables(coupling_matrix(N, profile), dt)
    sigma = 0.5 * (sigma + sigma.T)
    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] < -1e-12:
        raise NumericalError(
            f"noise covariance has eigenvalue {vals[0]:.3g} below -1e-12"
        )
    keep = vals > 1e-15 * max(vals[-1], 1e-300)
    root = _flush(vecs[:, keep] * np.sqrt(vals[keep]), _MATRIX_FLUSH)
    flow = _flush(np.array(flow), _MATRIX_FLUSH)
    for arr in (flow, sigma, root):
        arr.setflags(write=False)
    damping = float(profile.flat[0]) if profile.ndim == 0 else profile
    return NoiseTable(N, float(dt), damping, flow, sigma, root)


def exact_step(state: ChainState, table: NoiseTable, noise=None) -> ChainState:
    """Advance by ``table.dt`` exactly in distribution.

    ``noise`` holds ``table.rank`` standard normals; ``None`` suppresses the
    forcing and leaves the deterministic flow.
    """
    if state.N != table.N:
        raise ConfigError(f"state has {state.N} sites, table has {table.N}")
    a = table.flow @ state.amplitudes
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (table.rank,):
            raise DimensionError(f"expected {table.rank} normals")
        a = a + table.root @ noise
    return ChainState(a, state.time + table.dt, state.nu)


# --- ensemble simulation ------------------------------------------------------


class Observer:
    """Collects statistics from ensemble blocks.

    ``simulate`` gives every chunk of trajectories a ``fresh()`` copy, calls
    ``observe`` at each observation time with an ``(N, B)`` block and
    ``close`` at the end, then merges the copies in chunk order.
    """

    name = "observer"

    def fresh(self) -> "Observer":
        raise NotImplementedError

    def observe(self, k: int, t: float, a: np.ndarray) -> None:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def merge(self, other: "Observer") -> "Observer":
        raise NotImplementedError

    def table(self) -> Table:
        raise NotImplementedError


class _PerTime(Observer):
    def __init__(self):
        self.times: list[float] = []
        self.acc: list[MomentAccumulator] = []

    def _slot(self, k, t, dim):
        while len(self.acc) <= k:
            self.acc.append(MomentAccumulator(dim))
            self.times.append(float("nan"))
        self.times[k] = t
        return self.acc[k]

    def merge(self, other):
        for k, (t, acc) in enumerate(zip(other.times, other.acc)):
            self._slot(k, t, acc.dim).merge(acc)
        return self


class EnergyObserver(_PerTime):
    """Ensemble mean of ``|a|^2 = sum a_n^2`` at each observation time."""

    name = "energy"

    def fresh(self):
        return EnergyObserver()

    def observe(self, k, t, a):
        self._slot(k, t, 1).update(np.sum(a * a, axis=0)[:, None])

    def series(self):
        t = np.array(self.times)
        mean = np.array([acc.mean[0] for acc in self.acc])
        se = np.array([math.sqrt(acc.covariance()[0, 0] / acc.count)
                       if acc.count > 1 else 0.0 for acc in self.acc])
        return t, mean, se

    def table(self):
        tab = Table(["t", "mean_norm2", "se"])
        for t, m, s in zip(*self.series()):
            tab.add(float(t), float(m), float(s))
        return tab


class WindowCovarianceObserver(_PerTime):
    """Moments of the amplitudes on ``sites`` (1-based) at each time."""

    name = "window_cov"

    def __init__(self, sites):
        super().__init__()
        self.sites = np.asarray(sites, dtype=int)

    def fresh(self):
        return WindowCovarianceObserver(self.sites)

    def observe(self, k, t, a):
        self._slot(k, t, self.sites.size).update(a[self.sites - 1].T)

    def table(self):
        from .stats import empirical_cov
        tab = Table(["t_index", "m", "n", "t", "cov", "se"])
        for k, (t, acc) in enumerate(zip(self.times, self.acc)):
            if acc.count < 2:
                continue
            for i in range(self.sites.size):
                for j in range(i, self.sites.size):
                    est, se = empirical_cov(acc, i + 1, j + 1)
                    tab.add(k, int(self.sites[i]), int(self.sites[j]), t, est, se)
        return tab


class FluxObserver(Observer):
    """Time-averaged bond flux ``a_n a_{n+1}`` per trajectory.

    Each trajectory's average over observation times ``t >= t_min`` is one
    independent sample; the table reports ensemble mean and standard error.
    """

    name = "flux"

    def __init__(self, bonds, t_min: float = 0.0):
        self.bonds = np.asarray(bonds, dtype=int)
        self.t_min = t_min
        self.acc = MomentAccumulator(self.bonds.size)
        self._sum = None
        self._count = 0

    def fresh(self):
        return FluxObserver(self.bonds, self.t_min)

    def observe(self, k, t, a):
        if t < self.t_min:
            return
        f = a[self.bonds - 1] * a[self.bonds]
        self._sum = f if self._sum is None else self._sum + f
        self._count += 1

    def close(self):
        if self._count:
            self.acc.update((self._sum / self._count).T)
        self._sum, self._count = None, 0

    def merge(self, other):
        self.acc.merge(other.acc)
        return self

    def estimates(self):
        c = self.acc.covariance()
        se = np.sqrt(np.diag(c) / self.acc.count)
        return self.acc.mean.copy(), se

    def table(self):
        tab = Table(["bond", "mean_flux", "se"])
        mean, se = self.estimates()
        for b, m, s in zip(self.bonds, mean, se):
            tab.add(int(b), float(m), float(s))
        return tab


def _tree_merge(items):
    items = list(items)
    while len(items) > 1:
        nxt = [items[i].merge(items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


@dataclass
class _Plan:
    config: SimConfig
    table: NoiseTable | None
    damping: np.ndarray
    initial_root: np.ndarray | None


def _run_chunk(plan: _Plan, indices, observers):
    cfg = plan.config
    N, steps = cfg.N, cfg.steps
    gens = [streams.stream(cfg.seed, int(j)) for j in indices]
    if plan.initial_root is not None:
        xi = np.stack([g.standard_normal(N) for g in gens], axis=1)
        a = plan.initial_root @ xi
    else:
        a = np.zeros((N, len(indices)))
    width = plan.table.rank if plan.table is not None else 1
    for obs in observers:
        obs.observe(0, 0.0, a)
    block = max(1, 4096 // max(width, 1))
    for lo in range(0, steps, block):
        nblk = min(block, steps - lo)
        if cfg.forcing:
            noise = np.stack([g.standard_normal((nblk, width)) for g in gens], axis=2)
        for s in range(nblk):
            step = lo + s + 1
            if cfg.integrator == "exact":
                a = plan.table.flow @ a
                if cfg.forcing:
                    a += plan.table.root @ noise[s]
            else:
                xi = noise[s, 0] if cfg.forcing else np.zeros(len(indices))
                a = _euler_update(a, cfg.dt, plan.damping, xi)
            _flush(a, _STATE_FLUSH)
            if step % cfg.observe_every == 0:
                for obs in observers:
                    obs.observe(step // cfg.observe_every, step * cfg.dt, a)
    for obs in observers:
        obs.close()
    return observers


def simulate(config: SimConfig, observers=(), threads: int = 1,
             sampler=None) -> ScenarioReport:
    """Run the trajectory ensemble and return a report with observer tables.

    Trajectory ``j`` draws all of its randomness (initial state first, then
    step noise) from the stream keyed by ``(seed, j)``; chunks are merged in
    a fixed order, so the output does not depend on ``threads``.
    ``initial='stationary'`` needs a sampler for ``config.N`` sites (built on
    demand when not given).
    """
    t0 = time.perf_counter()
    damping = _damping_array(config.damping(), config.N)
    table = (build_noise_table(config.N, config.damping(), config.dt)
             if config.integrator == "exact" and config.steps > 0 else None)
    root = None
    if config.initial == "stationary":
        if sampler is None:
            from .sampler import build_sampler
            sampler = build_sampler(config.N, config.nu, config.seed)
        if sampler.N != config.N:
            raise ConfigError(f"sampler has {sampler.N} sites, config has {config.N}")
        root = np.asarray(sampler.root)
    plan = _Plan(config, table, damping, root)
    chunks = [range(lo, min(lo + config.chunk, config.trajectories))
              for lo in range(0, config.trajectories, config.chunk)]
    observers = list(observers)

    def job(indices):
        try:
            return _run_chunk(plan, indices, [o.fresh() for o in observers])
        except Exception as exc:
            raise RuntimeError(f"trajectories {indices.start}..{indices.stop - 1}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(job, chunks))
    else:
        results = [job(c) for c in chunks]
    merged = [_tree_merge(r[i] for r in results) for i in range(len(observers))]
    for orig, m in zip(observers, merged):
        orig.__dict__.update(m.__dict__)

    cfg = asdict(config)
    cfg["absorbing_layer"] = (None if config.absorbing_layer is None else
                              f"{config.absorbing_layer.length}:{config.absorbing_layer.max_damping}")
    report = ScenarioReport("simulate", cfg)
    for obs in observers:
        report.tables[obs.name] = obs.table()
    report.wall_clock = time.perf_counter() - t0
    return report
