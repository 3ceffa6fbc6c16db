"""Deterministic evolution of the unforced chain ``a_n' = a_{n-1} - a_{n+1} - nu a_n``.

The generating function ``alpha(z) = sum_n a_n i**(n-1) U~_{n-1}(z)`` turns the
chain into independent modes ``alpha(z) -> exp((2iz - nu) t) alpha(z)``.
Sampled at the ``M`` Gauss nodes (the zeros of ``U_M``) the transform is
unitary on an ``M``-site window and the modes are exactly the eigenvectors of
the ``M``-site truncation with ``a_0 = a_{M+1} = 0``.  So the same transform
is both the light-cone-padded approximation of the infinite chain and the
exact solver of the truncated chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AccuracyError, DimensionError, DomainError
from .orthopoly import QuadratureRule, cheb_u_table, quad_rule
from .specfun import bessel_j_signed

LIGHT_CONE_MARGIN = 40
_PHASES = np.array([1.0, 1j, -1.0, -1j])


@dataclass(frozen=True)
class ChainState:
    """Amplitudes ``a_1..a_N`` (``a_0 = 0`` implied), model time and damping."""

    amplitudes: np.ndarray
    time: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=float)
        if a.ndim != 1 or a.size < 1:
            raise DimensionError("amplitudes must be a nonempty 1-d array")
        if not np.all(np.isfinite(a)):
            raise DomainError("amplitudes must be finite")
        if self.nu < 0:
            raise DomainError(f"damping must be >= 0, got {self.nu}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def N(self) -> int:
        return self.amplitudes.size

    @classmethod
    def impulse(cls, N: int, site: int = 1, nu: float = 0.0) -> "ChainState":
        a = np.zeros(N)
        a[site - 1] = 1.0
        return cls(a, nu=nu)


@dataclass(frozen=True)
class SpectralField:
    """Generating function sampled at the nodes of ``rule``."""

    rule: QuadratureRule
    values: np.ndarray
    nu: float = 0.0
    time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.values.shape != (self.rule.order,):
            raise DimensionError("one spectral value per quadrature node expected")


def phased_basis(N: int, rule: QuadratureRule) -> np.ndarray:
    """``B[k, n-1] = i**(n-1) U~_{n-1}(z_k)``; shape ``(M, N)``."""
    table = cheb_u_table(N - 1, rule.nodes).T
    return table * _PHASES[np.arange(N) % 4]


def to_spectral(state: ChainState, rule: QuadratureRule) -> SpectralField:
    if rule.order < state.N:
        raise DimensionError(
            f"quadrature order {rule.order} < window size {state.N}"
        )
    values = phased_basis(state.N, rule) @ state.amplitudes
    return SpectralField(rule, values, state.nu, state.time)


def from_spectral(field: SpectralField, N: int) -> ChainState:
    rule = field.rule
    if N > rule.order:
        raise DimensionError(f"window size {N} > quadrature order {rule.order}")
    basis = phased_basis(N, rule)
    a = (np.conj(basis).T @ (rule.weights * field.values)).real
    return ChainState(a, field.time, field.nu)


def evolve_unforced(state: ChainState, t: float, pad: int | None = None) -> ChainState:
    """Unforced evolution over time ``t`` on a window of ``N + pad`` sites.

    ``pad=None`` picks ``40 + ceil(2t)`` extra sites, enough that the
    truncation is invisible to the first ``N`` sites up to roundoff.
    ``pad=0`` evolves the ``N``-site truncated chain exactly.
    """
    if t < 0:
        raise DomainError("backward evolution is not supported")
    if pad is None:
        pad = LIGHT_CONE_MARGIN + math.ceil(2.0 * t)
    if pad < 0:
        raise DomainError(f"pad must be >= 0, got {pad}")
    M = state.N + pad
    big = np.zeros(M)
    big[: state.N] = state.amplitudes
    rule = quad_rule(M)
    spec = to_spectral(ChainState(big, state.time, state.nu), rule)
    factor = np.exp((2j * rule.nodes - state.nu) * t)
    moved = replace(spec, values=spec.values * factor, time=state.time + t)
    out = from_spectral(moved, M)
    return ChainState(out.amplitudes[: state.N], state.time + t, state.nu)


def truncated_flow(N: int, nu: float, t: float) -> np.ndarray:
    """Matrix ``R(t) = exp(t A)`` of the ``N``-site truncated chain.

    The undamped part is orthogonal; it is projected back onto the orthogonal
    group (polar factor) so that repeated application conserves energy to
    roundoff instead of drifting linearly in the number of steps.
    """
    rule = quad_rule(N)
    basis = phased_basis(N, rule)
    factor = rule.weights * np.exp(2j * rule.nodes * t)
    flow = (np.conj(basis).T @ (factor[:, None] * basis)).real
    u, _, vt = np.linalg.svd(flow)
    return math.exp(-nu * t) * (u @ vt)


def coupling_matrix(N: int, damping=0.0) -> np.ndarray:
    """Drift matrix of the truncated chain; ``damping`` is scalar or per-site."""
    A = np.zeros((N, N))
    i = np.arange(N - 1)
    A[i + 1, i] = 1.0
    A[i, i + 1] = -1.0
    A -= np.diag(np.broadcast_to(np.asarray(damping, dtype=float), (N,)))
    return A


def propagator_entry(n: int, m: int, t: float, tol: float = 1e-13) -> float:
    """Response of site ``n`` at time ``t`` to unit data at site ``m`` (infinite chain)."""
    if n < 1 or m < 1:
        raise DomainError("site indices must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")

    def entry(M):
        rule = quad_rule(M)
        table = cheb_u_table(max(n, m) - 1, rule.nodes)
        phase = _PHASES[(m - n) % 4]
        integrand = table[n - 1] * table[m - 1] * np.exp(2j * rule.nodes * t)
        return float((phase * (rule.weights @ integrand)).real)

    M = max(64, math.ceil(3.0 * (t + n + m)))
    prev = entry(M)
    for _ in range(8):
        M *= 2
        cur = entry(M)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise AccuracyError(f"propagator_entry({n}, {m}, {t}) did not converge",
                        previous=prev, current=cur)


def propagator_entry_closed(n: int, m: int, t: float) -> float:
    """Bessel form ``J_{n-m}(2t) - (-1)**m J_{n+m}(2t)`` of :func:`propagator_entry`."""
    x = 2.0 * t
    return bessel_j_signed(n - m, x) - (-1) ** m * bessel_j_signed(n + m, x)


def fixed_point_residual(state: ChainState) -> float:
    """Sup norm of ``a_{n-1} - a_{n+1}`` over ``n <= N - 1`` with ``a_0 = 0``."""
    a = np.concatenate(([0.0], state.amplitudes))
    if a.size < 3:
        return 0.0
    return float(np.max(np.abs(a[:-2] - a[2:])))


def fixed_point_patterns(N: int) -> dict[str, ChainState]:
    """Candidate stationary patterns: ones on odd sites, or ones on even sites."""
    n = np.arange(1, N + 1)
    return {
        "odd-sites": ChainState((n % 2 == 1).astype(float)),
        "even-sites": ChainState((n % 2 == 0).astype(float)),
    }


def periodic_orbit_eval(z: float, n, t):
    """Single-mode bounded solution ``Re[(-i)**(n-1) U~_{n-1}(z) e^{2izt}]``.

    Period ``pi / z``; ``n`` and ``t`` broadcast.
    """
    if not 0.0 < z < 1.0:
        raise DomainError(f"mode parameter must lie in (0, 1), got {z}")
    n = np.asarray(n, dtype=int)
    if np.any(n < 1):
        raise DomainError("site indices must be >= 1")
    table = cheb_u_table(int(n.max()) - 1, np.array([z]))[:, 0]
    coef = np.conj(_PHASES[(n - 1) % 4]) * table[n - 1]
    out = (coef * np.exp(2j * z * np.asarray(t, dtype=float))).real
    return float(out) if out.ndim == 0 else out
