"""Stationary covariances ``c(m, n) = E a_m a_n`` of the forced chain.

The authoritative value is the time-domain integral
``(2/pi) int_0^inf G_m(s) G_n(s) ds``.  Everything else here is a closed form
or an alternative quadrature that is checked against it:

* ``cov_diag_closed``: ``(2/pi) 4n^2 / (4n^2 - 1)`` (undamped diagonal),
* ``cov_even_closed``: undamped entries with ``n - m`` even,
* ``cov_weber_schafheitlin``: every undamped entry, from the Weber-Schafheitlin
  integral of ``J_m J_n x^{-2}``,
* ``cov_nu_quad2d`` / ``cov_diag_nu_trig``: damped double integrals over the
  spectral variables.

Odd separations: nearest neighbours have ``c(n, n+1) = 1/2`` exactly (the mean
energy flux through every bond equals the injected power), while separations
of 3, 5, ... vanish.  An argument that all odd separations vanish breaks down
when the two integration variables are swapped: the odd kernel ``z - z'``
changes sign too, so the two orderings agree instead of cancelling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import AccuracyError, DomainError
from .kernel import kernel_gram_infinite
from .orthopoly import cheb_u_table, quad_rule

TWO_OVER_PI = 2.0 / math.pi


@lru_cache(maxsize=32)
def _time_domain_block(nmax: int, nu: float, tol: float):
    gram, err = kernel_gram_infinite(np.arange(1, nmax + 1), nu, tol)
    out = TWO_OVER_PI * gram
    out.setflags(write=False)
    return out, TWO_OVER_PI * err


def cov_time_domain_matrix(nmax: int, nu: float, tol: float = 1e-10) -> np.ndarray:
    """Time-domain covariances for sites ``1..nmax``."""
    if nmax < 1:
        raise DomainError(f"nmax must be >= 1, got {nmax}")
    if nu < 0:
        raise DomainError(f"nu must be >= 0, got {nu}")
    if tol < 1e-10:
        raise DomainError(f"tol must be >= 1e-10, got {tol}")
    # round up so neighbouring requests share one cached block
    size = max(16, 16 * math.ceil(nmax / 16))
    block, err = _time_domain_block(size, float(nu), float(tol))
    if err > tol:
        raise AccuracyError(f"time-domain error {err:.3g} exceeds {tol:.3g}",
                            current=block[:nmax, :nmax].copy())
    return block[:nmax, :nmax].copy()


def cov_time_domain(m: int, n: int, nu: float, tol: float = 1e-10) -> float:
    """``(2/pi) int_0^inf G_m G_n ds``, the reference covariance."""
    if m < 1 or n < 1:
        raise DomainError("site indices must be >= 1")
    return float(cov_time_domain_matrix(max(m, n), nu, tol)[m - 1, n - 1])


def cov_diag_closed(n: int) -> float:
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")
    q = 4.0 * n * n
    return TWO_OVER_PI * q / (q - 1.0)


def cov_even_closed(m: int, n: int) -> float:
    """Undamped ``c(m, n)`` for even ``n - m``:
    ``(-1)^n i^{n+m} (2/pi) [1/((n+m)^2-1) - 1/((n-m)^2-1)]``."""
    if m < 1 or n < 1:
        raise DomainError("site indices must be >= 1")
    if (n - m) % 2:
        raise DomainError(
            "closed form holds for even n - m only; use cov_time_domain"
        )
    sign = (-1) ** n * (-1) ** ((n + m) // 2)
    return sign * TWO_OVER_PI * (1.0 / ((n + m) ** 2 - 1) - 1.0 / ((n - m) ** 2 - 1))


def cov_weber_schafheitlin(m: int, n: int) -> float:
    """Undamped ``c(m, n) = 2mn int_0^inf J_m J_n x^{-2} dx`` in Gamma functions."""
    if m < 1 or n < 1:
        raise DomainError("site indices must be >= 1")
    # 1/Gamma vanishes at the poles, which kills odd separations >= 3
    num = special.gamma((m + n - 1) / 2.0)
    den = (
        special.rgamma((n - m + 3) / 2.0)
        * special.rgamma((m + n + 3) / 2.0)
        * special.rgamma((m - n + 3) / 2.0)
    )
    if m + n > 150:
        # ratio Gamma(k - 1/2) / Gamma(k + 3/2) without overflow
        k = (m + n) / 2.0
        ratio = math.exp(special.gammaln(k - 0.5) - special.gammaln(k + 1.5))
        den = special.rgamma((n - m + 3) / 2.0) * special.rgamma((m - n + 3) / 2.0)
        return float(2.0 * m * n * ratio * den / 4.0)
    return float(2.0 * m * n * num * den / 4.0)


def _lorentz_form(tm, tn, za, zb, wa, wb, nu, phase, block=512):
    """``Re[phase/pi * sum w_a w_b tm(z_a) tn(z_b) (nu + i(z_a-z_b))/(nu^2+(z_a-z_b)^2)]``."""
    total = 0j
    fa = wa * tm
    fb = wb * tn
    for lo in range(0, za.size, block):
        d = za[lo : lo + block, None] - zb[None, :]
        kern = (nu + 1j * d) / (nu * nu + d * d)
        total += fa[lo : lo + block] @ (kern @ fb)
    return (phase * total).real / math.pi


def _converge(evaluate, M0, tol, M_max, what):
    M = M0
    prev = evaluate(M)
    while True:
        M *= 2
        if M > M_max:
            raise AccuracyError(f"{what} did not converge by M={M_max}",
                                previous=prev, current=cur)
        cur = evaluate(M)
        if abs(cur - prev) < tol:
            return cur
        prev = cur


def cov_nu_quad2d(m: int, n: int, nu: float, M: int | None = None,
                  tol: float = 1e-9, M_max: int = 8192) -> float:
    """Damped ``c(m, n)`` from the double spectral integral on a tensor
    Gauss-Chebyshev rule.

    The Lorentzian ``1 / (nu^2 + (z - z')^2)`` has width ``nu``, so the
    starting order scales like ``1/nu``; the order is doubled until two
    successive values agree to ``tol``.
    """
    if m < 1 or n < 1:
        raise DomainError("site indices must be >= 1")
    if not nu > 0:
        raise DomainError(f"nu must be > 0, got {nu}")
    phase = (-1) ** n * 1j ** ((n + m) % 4)

    def evaluate(order):
        rule = quad_rule(order)
        table = cheb_u_table(max(m, n) - 1, rule.nodes)
        return _lorentz_form(table[n - 1], table[m - 1], rule.nodes, rule.nodes,
                             rule.weights, rule.weights, nu, phase)

    M0 = M if M is not None else max(64, math.ceil(8.0 / nu))
    return _converge(evaluate, M0, tol, M_max, f"cov_nu_quad2d({m},{n},{nu})")


def cov_diag_nu_trig(n: int, nu: float, M: int | None = None,
                     tol: float = 1e-9, M_max: int = 8192) -> float:
    """Damped diagonal covariance after ``z = cos(pi theta)``:

    ``2 nu int_0^1 int_0^1 sin(pi n t) sin(pi n t') sin(pi t) sin(pi t') /
    (nu^2 + (cos pi t - cos pi t')^2)``, on a tensor Gauss-Legendre rule.
    """
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")
    if not nu > 0:
        raise DomainError(f"nu must be > 0, got {nu}")

    def evaluate(order):
        x, w = leggauss(order)
        th = 0.5 * (x + 1.0)
        w = 0.5 * w
        f = w * np.sin(math.pi * n * th) * np.sin(math.pi * th)
        c = np.cos(math.pi * th)
        total = 0.0
        for lo in range(0, order, 512):
            d = c[lo : lo + 512, None] - c[None, :]
            total += f[lo : lo + 512] @ ((1.0 / (nu * nu + d * d)) @ f)
        return 2.0 * nu * total

    M0 = M if M is not None else max(64, math.ceil(8.0 / nu))
    return _converge(evaluate, M0, tol, M_max, f"cov_diag_nu_trig({n},{nu})")


def richardson_limit(nus, values) -> float:
    """Extrapolate ``values(nu)`` to ``nu = 0`` by polynomial (Neville) extrapolation."""
    nus = np.asarray(nus, dtype=float)
    table = list(np.asarray(values, dtype=float))
    for level in range(1, len(table)):
        table = [
            (nus[i] * table[i + 1] - nus[i + level] * table[i]) / (nus[i] - nus[i + level])
            for i in range(len(table) - 1)
        ]
    return float(table[0])


CLOSED_FORM = "closed_form"
QUADRATURE_2D = "quadrature_2d"
TIME_DOMAIN = "time_domain"
WEBER_SCHAFHEITLIN = "weber_schafheitlin"


@dataclass(frozen=True)
class CovarianceWindow:
    """Covariance of ``(a_1..a_N)`` with the method used for each entry."""

    N: int
    nu: float
    matrix: np.ndarray
    provenance: np.ndarray
