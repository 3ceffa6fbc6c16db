"""Normalized Chebyshev polynomials of the second kind and Gauss quadrature
for the semicircle weight ``sqrt(1 - z**2)``.

The normalized polynomials ``U~_n = sqrt(2/pi) U_n`` are orthonormal for
``sqrt(1 - z**2) dz`` on ``[-1, 1]``.  The complex basis ``i**n U~_n`` used by
the chain's generating function is never built here; callers fold the phase
in by parity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, EvaluationError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def cheb_u_norm(n: int, z):
    """Evaluate ``sqrt(2/pi) * U_n(z)`` by the three-term recurrence.

    ``z`` may be a scalar or an array; values with ``|z| > 1`` raise
    :class:`DomainError`.
    """
    if n < 0:
        raise DomainError(f"polynomial degree must be nonnegative, got {n}")
    zz = np.asarray(z, dtype=float)
    if np.any(np.abs(zz) > 1.0):
        raise DomainError("cheb_u_norm requires |z| <= 1")
    prev = np.zeros_like(zz)
    cur = np.full_like(zz, SQRT_2_OVER_PI)
    for _ in range(n):
        prev, cur = cur, 2.0 * zz * cur - prev
    return float(cur) if cur.ndim == 0 else cur


def cheb_u_table(nmax: int, z) -> np.ndarray:
    """Rows ``U~_0(z) .. U~_nmax(z)``; shape ``(nmax + 1, len(z))``.

    No domain check: callers pass quadrature nodes.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty((nmax + 1,) + z.shape)
    out[0] = SQRT_2_OVER_PI
    if nmax >= 1:
        out[1] = 2.0 * z * SQRT_2_OVER_PI
    for k in range(1, nmax):
        out[k + 1] = 2.0 * z * out[k] - out[k - 1]
    return out


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss rule for ``int f(z) sqrt(1 - z**2) dz``.

    Nodes are ``cos(k pi / (M + 1))`` for ``k = 1..M``, stored in that natural
    order, i.e. strictly decreasing.  Exact for polynomials of degree
    ``<= 2M - 1``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def theta(self) -> np.ndarray:
        """Angles ``k pi / (M + 1)`` with ``nodes == cos(theta)``."""
        k = np.arange(1, self.order + 1)
        return k * math.pi / (self.order + 1)


@lru_cache(maxsize=64)
def quad_rule(M: int) -> QuadratureRule:
    if M < 1:
        raise DomainError(f"quadrature order must be >= 1, got {M}")
    theta = np.arange(1, M + 1) * math.pi / (M + 1)
    nodes = np.cos(theta)
    weights = (math.pi / (M + 1)) * np.sin(theta) ** 2
    return QuadratureRule(nodes=nodes, weights=weights, order=M)


def integrate(f: Callable, rule: QuadratureRule) -> float:
    """Return ``sum_k w_k f(z_k)``, approximating ``int f(z) sqrt(1-z^2) dz``.

    ``f`` is called once with the whole node array.
    """
    values = np.asarray(f(rule.nodes), dtype=float)
    values = np.broadcast_to(values, rule.nodes.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand is not finite at node z[{k}] = {rule.nodes[k]!r}"
        )
    return float(values @ rule.weights)
