"""Ensemble estimators and the energy / flux diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps

from .errors import DomainError


def _amplitudes(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state), dtype=float)


def energy(state):
    """``sum a_n^2 / 2``; works along axis 0 for a batch of states."""
    a = _amplitudes(state)
    return 0.5 * np.sum(a * a, axis=0)


def flux(state, n: int):
    """Energy flux ``a_n a_{n+1}`` through the bond between sites ``n`` and ``n+1``.

    For the unforced chain ``d/dt (sum_{k<=n} a_k^2 / 2) = -flux(n)``.
    """
    a = _amplitudes(state)
    if not 1 <= n < a.shape[0]:
        raise DomainError(f"bond index {n} outside 1..{a.shape[0] - 1}")
    return a[n - 1] * a[n]


@dataclass
class MomentAccumulator:
    """Running mean and co-moment matrix of vector observations.

    ``merge`` is Chan's pairwise update, so combining accumulators built on
    disjoint data matches one pass over the concatenated data.
    """

    dim: int
    count: int = 0
    mean: np.ndarray = field(default=None)
    comoment: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.comoment is None:
            self.comoment = np.zeros((self.dim, self.dim))

    def update(self, batch) -> "MomentAccumulator":
        """Add observations given as rows of ``batch``."""
        x = np.atleast_2d(np.asarray(batch, dtype=float))
        if x.shape[1] != self.dim:
            raise DomainError(f"expected {self.dim} columns, got {x.shape[1]}")
        other = MomentAccumulator(self.dim, x.shape[0], x.mean(axis=0))
        d = x - other.mean
        other.comoment = d.T @ d
        return self.merge(other)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.comoment = (
                other.count, other.mean.copy(), other.comoment.copy())
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.comoment = (self.comoment + other.comoment
                         + np.outer(delta, delta) * (self.count * other.count / n))
        self.mean = self.mean + delta * (other.count / n)
        self.count = n
        return self

    def covariance(self) -> np.ndarray:
        if self.count < 2:
            raise DomainError("need at least two observations")
        return self.comoment / (self.count - 1)


def empirical_cov(acc: MomentAccumulator, m: int, n: int) -> tuple[float, float]:
    """Unbiased covariance of coordinates ``m``, ``n`` (1-based) and its
    standard error for independent Gaussian draws,
    ``sqrt((C_mm C_nn + C_mn^2) / count)``."""
    if acc.count < 2:
        raise DomainError("need at least two observations")
    c = acc.covariance()
    i, j = m - 1, n - 1
    est = float(c[i, j])
    se = math.sqrt((c[i, i] * c[j, j] + est * est) / acc.count)
    return est, se


def batch_means(series, batches: int = 32) -> tuple[float, float]:
    """Mean of a correlated series and its batch-means standard error."""
    x = np.asarray(series, dtype=float)
    if batches < 20:
        raise DomainError("batch means needs at least 20 batches")
    size = x.size // batches
    if size < 1:
        raise DomainError(f"series of length {x.size} too short for {batches} batches")
    means = x[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(batches))


def slope_fit(t, y) -> tuple[float, float]:
    """Least-squares slope of ``y`` against ``t`` and its standard error."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 3:
        raise DomainError("slope_fit needs at least 3 points")
    if np.ptp(t) == 0:
        raise DomainError("abscissae are all equal")
    res = _sps.linregress(t, y)
    return float(res.slope), float(res.stderr)
