"""Stochastic-convolution kernels of the forced chain.

The kernel for site ``n`` and damping ``nu`` is

    G_n(s) = exp(-nu s) * Re int (-i)**(n-1) U~_{n-1}(z) sqrt(1-z^2) e^{2izs} dz,

which is real: the phase ``(-i)**(n-1)`` pairs with the parity of
``U~_{n-1}`` so only a cosine (``n`` odd) or sine (``n`` even) transform
survives.  At ``nu = 0`` it reduces to ``sqrt(pi/2) * n * J_n(2s) / s``.

Note on the generating-function ODE: the mode equation is
``d alpha = (2iz - nu) alpha dt + sqrt(2/pi) dW``.  Writing the drift as
``-(nu + 2iz)`` flips the direction of propagation and contradicts the
propagator ``exp((2iz - nu) t)``; everything here uses ``2iz - nu``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import AccuracyError, DomainError
from .orthopoly import cheb_u_table, quad_rule
from .specfun import bessel_j

SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)
M_MAX = 2**16

# sign/trig pattern of (-i)^(n-1) against the parity of U~_{n-1}, by (n-1) mod 4
_PHASE_SIGN = np.array([1.0, 1.0, -1.0, -1.0])


def _quad_order(s: float, n: int) -> int:
    return max(64, math.ceil(3.0 * (s + n)))


def _kernel_sum(n: int, s: float, M: int) -> float:
    rule = quad_rule(M)
    u = cheb_u_table(n - 1, rule.nodes)[n - 1]
    arg = 2.0 * rule.nodes * s
    trig = np.cos(arg) if (n - 1) % 2 == 0 else np.sin(arg)
    return _PHASE_SIGN[(n - 1) % 4] * float((u * rule.weights) @ trig)


def kernel_g(n: int, nu: float, s: float, tol: float = 1e-13) -> float:
    """Kernel ``G_n^nu(s)`` by Gauss-Chebyshev quadrature with node doubling."""
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")
    if nu < 0 or s < 0:
        raise DomainError("kernel_g requires nu >= 0 and s >= 0")
    if tol < 1e-14:
        raise DomainError(f"tol must be >= 1e-14, got {tol}")
    M = _quad_order(s, n)
    prev = _kernel_sum(n, s, M)
    while True:
        M *= 2
        if M > M_MAX:
            raise AccuracyError(
                f"kernel_g(n={n}, s={s}) did not converge by M={M_MAX}",
                previous=prev,
                current=cur,
            )
        cur = _kernel_sum(n, s, M)
        if abs(cur - prev) < tol:
            return math.exp(-nu * s) * cur
        prev = cur


def kernel_g_closed0(n: int, s: float) -> float:
    """Undamped kernel in Bessel form, ``sqrt(pi/2) n J_n(2s) / s``."""
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    if s == 0.0:
        return SQRT_PI_OVER_2 if n == 1 else 0.0
    return SQRT_PI_OVER_2 * n * bessel_j(n, 2.0 * s) / s


def kernel_matrix(
    sites: Sequence[int], nu: float, s, tol: float = 1e-12, block: int = 4096
) -> np.ndarray:
    """Kernels for several sites at many times; shape ``(len(sites), len(s))``.

    One quadrature order is used for all times, sized for the largest; it is
    certified by doubling at the largest times.
    """
    sites = np.asarray(sites, dtype=int)
    s = np.asarray(s, dtype=float)
    if sites.min() < 1:
        raise DomainError("site indices must be >= 1")
    nmax = int(sites.max())
    smax = float(s.max()) if s.size else 0.0

    def evaluate(M, times):
        rule = quad_rule(M)
        table = cheb_u_table(nmax - 1, rule.nodes)[sites - 1] * rule.weights
        even = (sites - 1) % 2 == 0
        sign = _PHASE_SIGN[(sites - 1) % 4][:, None]
        out = np.empty((sites.size, times.size))
        for lo in range(0, times.size, block):
            arg = np.multiply.outer(2.0 * rule.nodes, times[lo : lo + block])
            c = table[even] @ np.cos(arg)
            sn = table[~even] @ np.sin(arg)
            out[even, lo : lo + block] = c
            out[~even, lo : lo + block] = sn
        return sign * out

    M = _quad_order(smax, nmax)
    probe = s[np.argsort(s)[-8:]]
    while True:
        if 2 * M > M_MAX:
            raise AccuracyError(f"kernel_matrix did not converge by M={M_MAX}")
        a, b = evaluate(M, probe), evaluate(2 * M, probe)
        if np.max(np.abs(a - b)) < tol:
            break
        M *= 2
    return evaluate(M, s) * np.exp(-nu * s)


@dataclass(frozen=True)
class KernelTable:
    """Sampled kernel values for one site."""

    n: int
    nu: float
    times: np.ndarray
    values: np.ndarray
    quad_order: int


def kernel_table(n: int, nu: float, times) -> KernelTable:
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0) or (times.size and times[0] < 0):
        raise DomainError("times must be increasing and nonnegative")
    values = kernel_matrix([n], nu, times)[0]
    return KernelTable(n, nu, times, values, _quad_order(float(times[-1]), n))


class GramResult(NamedTuple):
    value: np.ndarray
    error: float


def gram_integral(
    sites: Sequence[int],
    nu: float,
    T: float,
    panel: float = 1.0,
    order: int = 24,
    tol: float = 1e-11,
) -> GramResult:
    """``int_0^T G_m G_n ds`` for all pairs of ``sites`` (damping included).

    Gauss-Legendre panels of width ``panel``; the error estimate compares the
    ``order``-point rule with a rule of two thirds the order on the same
    panels.
    """
    if T <= 0:
        raise DomainError(f"horizon must be positive, got {T}")
    npan = max(1, math.ceil(T / panel))
    edges = np.linspace(0.0, T, npan + 1)

    def rule(p):
        x, w = leggauss(p)
        h = np.diff(edges)[:, None]
        nodes = (edges[:-1, None] + 0.5 * h * (x + 1.0)).ravel()
        return nodes, (0.5 * h * w).ravel()

    s_hi, w_hi = rule(order)
    s_lo, w_lo = rule(max(4, (2 * order) // 3))
    g_hi = kernel_matrix(sites, nu, s_hi)
    g_lo = kernel_matrix(sites, nu, s_lo)
    hi = (g_hi * w_hi) @ g_hi.T
    lo = (g_lo * w_lo) @ g_lo.T
    err = float(np.max(np.abs(hi - lo)))
    if err > tol:
        raise AccuracyError(
            f"panel quadrature error {err:.3g} exceeds {tol:.3g}",
            previous=lo,
            current=hi,
        )
    return GramResult(hi, err)


def _hankel_coefficients(n: int, X: float, cutoff: float = 1e-18) -> np.ndarray:
    """Coefficients ``i**k a_k(n)`` of the Hankel asymptotic series in 1/x,
    truncated once a term drops below ``cutoff`` at ``x = X``."""
    mu = 4.0 * n * n
    coef = [1.0 + 0j]
    a = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        a *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        new = abs(a) / X**k
        if new > term:
            raise AccuracyError(
                f"Hankel series for order {n} diverges at x={X}; "
                f"start the tail further out",
                current=term,
            )
        term = new
        coef.append(a * 1j**k)
        if term < cutoff:
            return np.array(coef)


def _exp_moment(p: int, X: float) -> complex:
    """``int_X^inf e^{2ix} x^{-p} dx`` by its integration-by-parts series."""
    total = 0j
    term = 1.0 + 0j
    k = 0
    while abs(term) > 1e-19:
        total += term
        term *= (p + k) * (-0.5j / X)
        k += 1
        if k > 200:
            raise AccuracyError("oscillatory tail series did not converge")
    return 0.5j * np.exp(2j * X) * X ** (-p) * total


def bessel_tail(m: int, n: int, X: float) -> float:
    """``int_X^inf J_m(x) J_n(x) x^{-2} dx`` from the Hankel expansions.

    The non-oscillatory mean and the ``e^{2ix}`` part are both integrated
    term by term.  Requires ``X`` well beyond ``max(m, n)**2 / 4``.
    """
    sm = _hankel_coefficients(m, X)
    sn = _hankel_coefficients(n, X)
    mean = np.convolve(sm, np.conj(sn))
    osc = np.convolve(sm, sn)
    j = np.arange(mean.size)
    mean_part = np.sum(mean * X ** (-(j + 2.0)) / (j + 2.0))
    osc_part = sum(q * _exp_moment(int(k) + 3, X) for k, q in enumerate(osc))
    value = np.exp(0.5j * math.pi * (n - m)) * mean_part
    value += np.exp(-0.5j * math.pi * (m + n + 1)) * osc_part
    return float(value.real) / math.pi


def tail_start(nmax: int, base: float = 200.0) -> float:
    """Where the undamped asymptotic tail takes over for sites up to ``nmax``."""
    return max(base, math.ceil(nmax * nmax / 2.0))


def kernel_gram_infinite(sites: Sequence[int], nu: float, tol: float = 1e-10):
    """``int_0^inf G_m G_n ds`` for all pairs; returns ``(matrix, error)``.

    Undamped: quadrature to ``S`` plus the Hankel tail.  Damped: quadrature
    until the bound ``(pi/2) e^{-2 nu S} / (2 nu)`` on the remainder is below
    ``tol``.
    """
    sites = np.asarray(sites, dtype=int)
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    if nu == 0.0:
        S = tail_start(int(sites.max()))
        gram, err = gram_integral(sites, 0.0, S)
        tail = np.empty_like(gram)
        for i, m in enumerate(sites):
            for k, n in enumerate(sites[i:], start=i):
                tail[i, k] = tail[k, i] = math.pi * m * n * bessel_tail(
                    int(m), int(n), 2.0 * S
                )
        return gram + tail, err
    S = math.log(math.pi / (4.0 * nu * tol)) / (2.0 * nu)
    if S > 50_000:
        raise AccuracyError(f"damping nu={nu} too small for the exponential tail")
    # panels no wider than the decay length 1/(2 nu) of the integrand
    gram, err = gram_integral(sites, nu, max(S, 1.0), panel=min(1.0, 0.5 / nu))
    return gram, err + tol


class L2Result(NamedTuple):
    value: float
    tail_bound: float


def _undamped_tail_bound(n: int, T: float) -> float:
    # x * (J_n^2 + Y_n^2)(x) decreases in x for n >= 1
    x = 2.0 * T
    modulus2 = special.jv(n, x) ** 2 + special.yv(n, x) ** 2
    return math.pi * n * n * modulus2 / (4.0 * T)


def kernel_l2(n: int, nu: float, T: float, tol: float = 1e-10) -> L2Result:
    """``int_0^T G_n(s)^2 ds``; ``T = inf`` gives the full integral.

    For finite ``T`` and ``nu = 0`` the second field bounds the neglected
    ``int_T^inf``; for ``nu > 0`` it is ``(pi/2) e^{-2 nu T} / (2 nu)``.
    """
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")
    if not T > 0:
        raise DomainError(f"horizon must be positive, got {T}")
    if math.isinf(T):
        value, err = kernel_gram_infinite([n], nu, tol)
        return L2Result(float(value[0, 0]), err)
    value = float(gram_integral([n], nu, T).value[0, 0])
    if nu == 0.0:
        bound = _undamped_tail_bound(n, T)
    else:
        bound = 0.25 * math.pi * math.exp(-2.0 * nu * T) / nu
    return L2Result(value, bound)
