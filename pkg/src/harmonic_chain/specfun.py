"""Bessel functions of the first kind for integer order and real argument.

Used only to cross-check kernels, propagators and covariance tails, so the
implementation is self-contained: Miller's backward recurrence normalized by
``J_0 + 2 * sum_k J_2k = 1``, with a power series for small arguments.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ChainError, DomainError

MAX_ORDER = 10_000
_START_LIMIT = 1_000_000
_AGREE = 1e-13
_SERIES_BELOW = 0.5
_BIG = 1e200


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    if half == 0.0:  # x subnormal
        return 1.0 if n == 0 else 0.0
    lead = n * math.log(half) - math.lgamma(n + 1) if n else 0.0
    term = math.exp(lead)
    total = term
    q = -half * half
    k = 0
    while abs(term) > 1e-18 * abs(total):
        k += 1
        term *= q / (k * (n + k))
        total += term
    return total


def _miller(nmax: int, x: float, start: int) -> np.ndarray:
    """J_0..J_nmax by backward recurrence from order ``start`` (even)."""
    out = np.zeros(nmax + 1)
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        # j_cur holds the unnormalized J_k
        if k <= nmax:
            out[k] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _BIG:
            j_cur /= _BIG
            j_next /= _BIG
            norm /= _BIG
            out /= _BIG
    out[0] = j_cur
    norm += j_cur
    return out / norm


def bessel_j_all(nmax: int, x: float) -> np.ndarray:
    """Return ``[J_0(x), ..., J_nmax(x)]`` for ``x >= 0``."""
    if nmax < 0 or nmax > MAX_ORDER:
        raise DomainError(f"order must lie in [0, {MAX_ORDER}], got {nmax}")
    if not x >= 0.0 or not math.isfinite(x):
        raise DomainError(f"argument must be finite and >= 0, got {x}")
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    if x < _SERIES_BELOW:
        return np.array([_series(k, x) for k in range(nmax + 1)])

    margin = math.ceil(10 + 1.5 * x)
    start = nmax + margin
    start += start % 2
    prev = _miller(nmax, x, start)
    while True:
        margin *= 2
        start = nmax + margin
        start += start % 2
        if start > _START_LIMIT:
            raise ChainError(
                f"Miller recurrence start order {start} exceeds {_START_LIMIT}"
            )
        cur = _miller(nmax, x, start)
        if np.max(np.abs(cur - prev)) < _AGREE:
            return cur
        prev = cur


def bessel_j(n: int, x: float) -> float:
    """Bessel function ``J_n(x)`` for integer ``0 <= n <= 10**4``, ``x >= 0``.

    >>> round(bessel_j(1, 2.0), 6)
    0.576725
    """
    if n < 0:
        raise DomainError(f"order must be nonnegative, got {n}")
    if 0.0 < x < _SERIES_BELOW:
        return _series(n, x)
    return float(bessel_j_all(n, x)[n])


def bessel_j_signed(n: int, x: float) -> float:
    """``J_n(x)`` for any integer order, using ``J_{-n} = (-1)**n J_n``."""
    if n < 0:
        return (-1) ** n * bessel_j(-n, x)
    return bessel_j(n, x)
